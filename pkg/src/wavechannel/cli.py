"""Command-line front end: every module as a deterministic subcommand.

Subcommands: lemmas, basis, evolve, energy, radiation, nlw, pipeline.
Each accepts a JSON config file (--config), validated against the
schemas shipped in wavechannel/schemas with unknown keys rejected;
explicit flags override config values.  Artifacts are a JSON report
(<out>.json, also echoed to stdout) plus subcommand-specific CSV
tables, written atomically.  Relative output paths resolve against
$WAVECHANNEL_OUTDIR when it is set.

Exit codes: 0 success, 1 validation error, 2 numerical failure
(blow-up, contaminated diagnostics, violated exact inequality), the
latter with the diagnostic written to the JSON artifact.

CSV columns: trajectories (t, r, u, ut); energy series (t, E_ext) or
(t, E_total); radiation profiles (s, g); decay tables (r, value).
Floats are printed with 17 significant digits, so identical config and
seed reproduce artifacts byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import tempfile
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import jsonschema
import numpy as np

from . import __version__
from . import decay_lab as dl
from . import exact_evolution as ev
from . import exterior_basis as eb
from . import polylib
from . import radial_solver as rs
from . import radiation3 as rad

_VERSION = f"wavechannel-{__version__}"
_VARIANTS = ("sup_odd", "deriv_odd", "sup_even", "deriv_even")
# ValueError messages that signal a numerical failure rather than bad input
_NUMERICAL_MARKERS = ("blew up", "blow", "contamination", "no stored snapshot")


class UsageError(Exception):
    """Bad flags, bad config, or a violated precondition; exit code 1."""


class NumericalFailure(Exception):
    """A run that failed numerically; carries the diagnostic report."""

    def __init__(self, report: dict):
        super().__init__(report.get("reason", "numerical failure"))
        self.report = report


# ---------------------------------------------------------------------------
# plumbing


def _plain(x: Any) -> Any:
    """Make a report JSON-serializable and deterministic."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, Fraction):
        return {"num": x.numerator, "den": x.denominator}
    if isinstance(x, Path):
        return str(x)
    return x


def _dump_json(doc: dict) -> str:
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(float(v), ".17g") for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _resolve_base(out: str) -> Path:
    p = Path(out)
    if not p.is_absolute():
        p = Path(os.environ.get("WAVECHANNEL_OUTDIR", ".")) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _with_ext(base: Path, ext: str) -> Path:
    return base.parent / (base.name + ext)


def _schema(sub: str) -> dict:
    text = resources.files("wavechannel").joinpath(f"schemas/{sub}.json").read_text()
    return json.loads(text)


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        loaded = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise UsageError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(loaded, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return loaded


def _numerical_guard(fn: Callable[[], Any]) -> Any:
    try:
        return fn()
    except ValueError as e:
        msg = str(e)
        if any(marker in msg for marker in _NUMERICAL_MARKERS):
            raise NumericalFailure({"reason": msg}) from e
        raise


# ---------------------------------------------------------------------------
# defaults and argument wiring

_DEFAULTS: dict[str, dict[str, Any]] = {
    "lemmas": {
        "variant": "all",
        "degree_max": 15,
        "trials": 1000,
        "seed": 0,
        "out": "lemmas",
    },
    "basis": {
        "d": 3,
        "nu": 0,
        "R": 1.0,
        "A": [],
        "B": [],
        "check": ["part2", "part3"],
        "R1": None,
        "seed": 0,
        "out": "basis",
    },
    "evolve": {
        "d": 3,
        "nu": 0,
        "R": 1.0,
        "A": [],
        "B": [],
        "gaussian": None,
        "r_max": 16.0,
        "n_r": 801,
        "t_final": 4.0,
        "cfl": 0.45,
        "scheme": "leapfrog",
        "store_every": 100,
        "exact": False,
        "frames": 9,
        "seed": 0,
        "out": "evolve",
    },
    "energy": {
        "d": 3,
        "nu": 0,
        "R": 1.0,
        "A": [],
        "B": [],
        "gaussian": None,
        "r_max": 16.0,
        "n_r": 801,
        "t_final": 4.0,
        "cfl": 0.45,
        "store_every": 50,
        "cone_radius": 1.0,
        "seed": 0,
        "out": "energy",
    },
    "radiation": {
        "d": 3,
        "nu": 0,
        "R": 1.0,
        "A": [],
        "B": [],
        "gaussian": None,
        "r_max": 16.0,
        "n_r": 1601,
        "tail_radii": None,
        "seed": 0,
        "out": "radiation",
    },
    "nlw": {
        "d": 3,
        "nu": 0,
        "R": 1.0,
        "A": [],
        "B": [],
        "gaussian": None,
        "r_max": 16.0,
        "n_r": 801,
        "t_final": 4.0,
        "cfl": 0.45,
        "store_every": 50,
        "nonlinearity": "defocusing_quintic",
        "probe_radii": None,
        "seed": 0,
        "out": "nlw",
    },
    "pipeline": {
        "t_final": 4.0,
        "nonlinearity": "defocusing_quintic",
        "floor_tol": 1e-9,
        "cutoff_width": 4.0,
        "snapshots": 32,
        "seed": 0,
        "out": "pipeline",
    },
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file, schema-validated")
    p.add_argument("--out", help="artifact base path (writes <out>.json etc)")
    p.add_argument("--seed", type=int, help="deterministic seed, echoed in reports")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, help="ambient dimension of the mode family")
    p.add_argument("--nu", type=int, help="harmonic degree of the mode")
    p.add_argument("--R", type=float, help="exterior radius of the data")
    p.add_argument("--A", type=float, nargs="*", help="position coefficients")
    p.add_argument("--B", type=float, nargs="*", help="velocity coefficients")


def _add_gaussian_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--gaussian",
        type=float,
        nargs=2,
        metavar=("AMP", "WIDTH"),
        help="use gaussian bump data instead of a mode",
    )


def _add_grid_flags(p: argparse.ArgumentParser, time: bool = True) -> None:
    p.add_argument("--r-max", dest="r_max", type=float, help="outer grid radius")
    p.add_argument("--n-r", dest="n_r", type=int, help="number of radial nodes")
    if time:
        p.add_argument("--t-final", dest="t_final", type=float, help="run length")
        p.add_argument("--cfl", type=float, help="Courant number dt/dr")
        p.add_argument(
            "--store-every", dest="store_every", type=int, help="snapshot stride"
        )


def _build_parser() -> _Parser:
    parser = _Parser(prog="wavechannel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("lemmas", help="exact interval inequalities on random polynomials")
    p.add_argument("--variant", choices=("all",) + _VARIANTS)
    p.add_argument("--degree-max", dest="degree_max", type=int)
    p.add_argument("--trials", type=int)
    _add_common(p)

    p = sub.add_parser("basis", help="mode norms and decay ratios")
    _add_data_flags(p)
    p.add_argument("--check", nargs="+", choices=("part2", "part3"))
    p.add_argument("--R1", type=float, nargs="+", help="tail radii for part3")
    _add_common(p)

    p = sub.add_parser("evolve", help="evolve data and write the trajectory")
    _add_data_flags(p)
    _add_gaussian_flag(p)
    _add_grid_flags(p)
    p.add_argument("--scheme", choices=rs.SCHEMES)
    p.add_argument("--exact", action="store_const", const=True, help="closed-form evolution")
    p.add_argument("--frames", type=int, help="stored times for --exact")
    _add_common(p)

    p = sub.add_parser("energy", help="exterior cone energy along a linear run")
    _add_data_flags(p)
    _add_gaussian_flag(p)
    _add_grid_flags(p)
    p.add_argument("--cone-radius", dest="cone_radius", type=float)
    _add_common(p)

    p = sub.add_parser("radiation", help="radiation profile of radial data")
    _add_data_flags(p)
    _add_gaussian_flag(p)
    _add_grid_flags(p, time=False)
    p.add_argument("--tail-radii", dest="tail_radii", type=float, nargs="+")
    _add_common(p)

    p = sub.add_parser("nlw", help="nonlinear run with energy and tail diagnostics")
    _add_data_flags(p)
    _add_gaussian_flag(p)
    _add_grid_flags(p)
    p.add_argument("--nonlinearity", choices=("defocusing_quintic", "focusing_quintic"))
    p.add_argument("--probe-radii", dest="probe_radii", type=float, nargs="+")
    _add_common(p)

    p = sub.add_parser("pipeline", help="decay pipeline from a config file")
    p.add_argument("--config", required=True, help="JSON config file (required)")
    p.add_argument("--out", help="artifact base path")
    return parser


def _effective_config(sub: str, args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS[sub])
    config_path = getattr(args, "config", None)
    if config_path is not None:
        cfg.update(_load_config(config_path))
    for key in list(cfg):
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    extra = {
        k: v
        for k, v in vars(args).items()
        if k not in cfg and k not in ("subcommand", "config") and v is not None
    }
    cfg.update(extra)
    payload = {k: v for k, v in cfg.items() if v is not None}
    try:
        jsonschema.validate(payload, _schema(sub))
    except jsonschema.ValidationError as e:
        where = "/".join(str(part) for part in e.absolute_path) or "config"
        raise UsageError(f"invalid configuration at {where}: {e.message}") from e
    return cfg


# ---------------------------------------------------------------------------
# data construction shared by the run-style subcommands


def _mode_from_cfg(cfg: dict) -> eb.ExteriorModeData:
    return eb.build_exterior_mode(
        eb.ModeSpec(cfg["d"], cfg["nu"]), cfg["R"], A=cfg["A"], B=cfg["B"]
    )


def _field_from_cfg(cfg: dict, config: rs.SolverConfig) -> rs.RadialGridField:
    if cfg.get("gaussian") is not None:
        amp, width = cfg["gaussian"]
        return rs.gaussian_bump(config, amp, width, lifted_dim=3)
    return rs.lifted_field_from_mode(_mode_from_cfg(cfg), config)


def _solver_config(cfg: dict, **overrides: Any) -> rs.SolverConfig:
    kw: dict[str, Any] = dict(
        r_max=cfg["r_max"], n_r=cfg["n_r"], t_final=cfg["t_final"], cfl=cfg["cfl"]
    )
    if "store_every" in cfg:
        kw["store_every"] = cfg["store_every"]
    kw.update(overrides)
    return rs.SolverConfig(**kw)


# ---------------------------------------------------------------------------
# handlers


def _run_lemmas(cfg: dict, base: Path) -> dict:
    variants = _VARIANTS if cfg["variant"] == "all" else (cfg["variant"],)
    rng = random.Random(cfg["seed"])
    per: dict[str, dict] = {}
    total = 0
    for variant in variants:
        violations = 0
        worst: Optional[float] = None
        for _ in range(cfg["trials"]):
            degree = rng.randint(0, cfg["degree_max"])
            coeffs = [
                Fraction(rng.randint(-9, 9), rng.randint(1, 9))
                for _ in range(degree + 1)
            ]
            L = Fraction(rng.randint(1, 16), rng.randint(1, 4))
            l = L * Fraction(rng.randint(1, 4), 8)
            chk = polylib.lemma_check(coeffs, variant, L, l)
            if not chk.holds:
                violations += 1
            if chk.rhs > 0:
                margin = float((chk.rhs - chk.lhs) / chk.rhs)
                worst = margin if worst is None else min(worst, margin)
        per[variant] = {
            "trials": cfg["trials"],
            "violations": violations,
            "min_relative_margin": worst,
        }
        total += violations
    report = {"violations": total, "variants": per}
    if total:
        report["reason"] = "an exact inequality failed on sampled data"
        raise NumericalFailure(report)
    return report


def _run_basis(cfg: dict, base: Path) -> dict:
    mode = _mode_from_cfg(cfg)
    report: dict[str, Any] = {"mode": json.loads(eb.to_json(mode))}
    for item in cfg["check"]:
        if item == "part2":
            n = eb.series_norms(mode)
            report["part2"] = {
                "angular": n.angular,
                "u1_norm2": n.u1_norm2,
                "du0_norm2": n.du0_norm2,
            }
        else:
            radii = cfg["R1"] if cfg["R1"] is not None else [2.0 * cfg["R"]]
            report["part3"] = [
                {
                    "R1": R1,
                    "tail": b.tail,
                    "reference": b.reference,
                    "ratio": b.ratio,
                    "trivial": b.trivial,
                }
                for R1 in radii
                for b in (eb.decay_bound_check(mode, R1),)
            ]
    return report


def _chain_terms(desc: ev.ExteriorDescriptor) -> list[dict]:
    return [
        {
            "weight": weight,
            "k": sol.k,
            "kind": sol.kind,
            "monomials": [
                {"coeff": c, "t_power": a, "r_power": b}
                for (c, a, b) in sol.monomials()
            ],
        }
        for weight, sol in desc.terms
    ]


def _run_evolve(cfg: dict, base: Path) -> dict:
    csv_path = _with_ext(base, ".csv")
    if cfg["exact"]:
        if cfg.get("gaussian") is not None:
            raise UsageError("exact evolution needs basis-backed data, not a gaussian")
        mode = _mode_from_cfg(cfg)
        desc = ev.descriptor_for_mode(mode)
        r = np.linspace(0.0, cfg["r_max"], cfg["n_r"])
        times = np.linspace(0.0, cfg["t_final"], cfg["frames"])
        rows: list[tuple[float, float, float, float]] = []
        for t in times:
            cov = desc.covers(r, float(t))
            if np.any(cov):
                vals = desc.eval(r[cov], float(t))
                rows.extend(
                    (float(t), float(ri), float(ui), float(uti))
                    for ri, ui, uti in zip(r[cov], vals.u, vals.ut)
                )
        _write_csv(csv_path, ("t", "r", "u", "ut"), rows)
        return {
            "exact": True,
            "chains": _chain_terms(desc),
            "rows": len(rows),
            "csv": csv_path.name,
        }
    config = _solver_config(cfg, scheme=cfg["scheme"])
    fld = _field_from_cfg(cfg, config)
    traj = rs.solve_mode_linear(fld, config)
    rows = [
        (float(t), float(ri), float(ui), float(uti))
        for t, f in zip(traj.times, traj.fields)
        for ri, ui, uti in zip(f.r, f.u, f.ut)
    ]
    _write_csv(csv_path, ("t", "r", "u", "ut"), rows)
    report = {
        "exact": False,
        "lifted_dim": fld.lifted_dim,
        "stored_times": len(traj.times),
        "blown_up": traj.blown_up,
        "csv": csv_path.name,
    }
    if traj.blown_up:
        report["reason"] = f"the run blew up before t={cfg['t_final']:g}"
        raise NumericalFailure(report)
    return report


def _run_energy(cfg: dict, base: Path) -> dict:
    config = _solver_config(cfg)
    fld = _field_from_cfg(cfg, config)
    traj = rs.solve_mode_linear(fld, config)
    series = _numerical_guard(lambda: rs.cone_energy(traj, cfg["cone_radius"]))
    csv_path = _with_ext(base, ".csv")
    _write_csv(csv_path, ("t", "E_ext"), zip(series.times, series.values))
    return {
        "cone_radius": cfg["cone_radius"],
        "initial": float(series.values[0]),
        "final": float(series.values[-1]),
        "max": float(np.max(series.values)),
        "truncated": series.truncated,
        "csv": csv_path.name,
    }


def _run_radiation(cfg: dict, base: Path) -> dict:
    r = np.linspace(0.0, cfg["r_max"], cfg["n_r"])
    if cfg.get("gaussian") is not None:
        amp, width = cfg["gaussian"]
        u0 = amp * np.exp(-((r / width) ** 2))
        u1 = np.zeros_like(r)
        profile = rad.forward_map(r, u0, u1)
        isometry: Optional[float] = rad.isometry_ratio(r, u0, u1)
    else:
        mode = _mode_from_cfg(cfg)
        if mode.spec.d != 3 or mode.spec.nu != 0:
            raise UsageError("the radiation map takes d = 3 radial data (nu = 0)")
        profile = rad.mode_profile(mode, r)
        vals = eb.eval_extended(mode, r)
        try:
            isometry = rad.isometry_ratio(r, vals.u0, vals.u1, du0=vals.du0_dr)
        except ValueError:
            isometry = None  # radiation-free data has no ratio
    csv_path = _with_ext(base, ".csv")
    _write_csv(csv_path, ("s", "g"), zip(profile.s, profile.g))
    radii = cfg["tail_radii"] if cfg["tail_radii"] is not None else [1.0, 2.0, 4.0, 8.0]
    return {
        "charge": profile.mean(),
        "norm2": profile.norm2(),
        "isometry_ratio": isometry,
        "tails": [{"r": x, "tail": rad.tail_S(profile, x)} for x in radii],
        "csv": csv_path.name,
    }


def _run_nlw(cfg: dict, base: Path) -> dict:
    config = _solver_config(cfg, nonlinearity=cfg["nonlinearity"])
    fld = _field_from_cfg(cfg, config)
    if fld.lifted_dim != 3:
        raise UsageError("nonlinear runs take physical d = 3 radial data")
    traj = rs.solve_quintic(fld, config)
    csv_path = _with_ext(base, ".csv")
    if traj.blown_up:
        _write_csv(csv_path, ("t", "E_total"), [])
        raise NumericalFailure(
            {
                "reason": f"the run blew up after t={float(traj.times[-1]):g}",
                "last_stored_time": float(traj.times[-1]),
            }
        )
    series = rs.energy_series(traj)
    _write_csv(csv_path, ("t", "E_total"), zip(traj.times, series))
    drift = float((np.max(series) - np.min(series)) / series[0]) if series[0] > 0 else 0.0
    report: dict[str, Any] = {
        "nonlinearity": cfg["nonlinearity"],
        "blown_up": False,
        "initial_energy": float(series[0]),
        "relative_drift": drift,
        "csv": csv_path.name,
    }
    if cfg["probe_radii"] is not None:
        report["l6_tails"] = [
            {"r": p, "value": _numerical_guard(lambda p=p: rs.l6_tail(traj, p))}
            for p in cfg["probe_radii"]
        ]
    return report


def _run_pipeline(cfg: dict, base: Path) -> dict:
    mode = eb.build_exterior_mode(eb.ModeSpec(3, 0), cfg["R"], A=cfg["A"])
    config = rs.SolverConfig(
        r_max=cfg["r_max"], n_r=cfg["n_r"], t_final=cfg["t_final"]
    )
    fld = rs.lifted_field_from_mode(mode, config)
    rep = _numerical_guard(
        lambda: dl.nonlinear_decay_pipeline(
            fld,
            cfg["nonlinearity"],
            cfg["R"],
            cfg["probe_radii"],
            t_final=cfg["t_final"],
            floor_tol=cfg["floor_tol"],
            cutoff_width=cfg["cutoff_width"],
            snapshots=cfg["snapshots"],
        )
    )
    tables = {
        "radiation_tail": (rep.s_report, ".s.csv"),
        "gradient_tail": (rep.dr_u0_report, ".dru0.csv"),
        "sixth_power_tail": (rep.l6_report, ".l6.csv"),
    }
    out: dict[str, Any] = {
        "cutoff": list(rep.cutoff),
        "t_end": rep.t_end,
        "floor_tol": rep.floor_tol,
    }
    for name, (table, ext) in tables.items():
        csv_path = _with_ext(base, ext)
        _write_csv(csv_path, ("r", "value"), zip(table.r, table.values))
        out[name] = {
            "exponent": table.exponent,
            "residual": table.residual,
            "truncated": table.truncated,
            "csv": csv_path.name,
        }
    return out


_HANDLERS: dict[str, Callable[[dict, Path], dict]] = {
    "lemmas": _run_lemmas,
    "basis": _run_basis,
    "evolve": _run_evolve,
    "energy": _run_energy,
    "radiation": _run_radiation,
    "nlw": _run_nlw,
    "pipeline": _run_pipeline,
}


# ---------------------------------------------------------------------------
# entry points


def _emit(sub: str, cfg: dict, body: dict, base: Path, key: str) -> str:
    doc = {"subcommand": sub, "version": _VERSION, "config": cfg, key: body}
    text = _dump_json(doc)
    _atomic_write(_with_ext(base, ".json"), text)
    return text


def run(argv: Sequence[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        print("error: a subcommand is required", file=sys.stderr)
        return 1
    sub = args.subcommand
    try:
        cfg = _effective_config(sub, args)
        base = _resolve_base(cfg["out"])
        body = _HANDLERS[sub](cfg, base)
        sys.stdout.write(_emit(sub, cfg, body, base, "report"))
        return 0
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except NumericalFailure as e:
        sys.stdout.write(_emit(sub, cfg, e.report, base, "failure"))
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
