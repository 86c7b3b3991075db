"""Finite-difference evolution of radial wave equations.

Two equations are covered on a uniform radial grid:

    lifted linear:  u_tt = u_rr + ((D-1)/r) u_r            (any D >= 2)
    radial quintic: u_tt = u_rr + (2/r) u_r + F(u),  d = 3, |F(u)| <= C|u|^5

The default scheme is leapfrog in time with centered second-order
space.  At r = 0 regular data is evolved through the even-parity limit
of the operator (D * u_rr); a positive r_min uses one-sided stencils
instead.  The outer edge is closed either by exact ghost values from an
ExteriorDescriptor (basis data evolves in closed form, so the boundary
is not an approximation at all) or by quadratic extrapolation, in which
case the numerical domain of dependence shrinks by exactly one cell per
step and every diagnostic accounts for that contaminated band.

Cone-energy diagnostics follow the lifted single-mode convention
int (u_t^2 + u_r^2) r^(D-1) dr without a sphere-area factor; the
nonlinear d = 3 diagnostics (critical-norm and sixth-power tails) are
physical-space integrals and carry the 4 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exact_evolution import ExteriorDescriptor, descriptor_for_mode
from .exterior_basis import ExteriorModeData, ModeSpec

SCHEMES = ("leapfrog", "rk4_mol")
NONLINEARITIES = ("none", "defocusing_quintic", "focusing_quintic", "custom")


@dataclass(frozen=True)
class SolverConfig:
    """Grid, stepping, and equation selection for one run.

    The parity closure at r = 0 tightens the usable Courant number to
    about sqrt(2/D) in lifted dimension D; the default cfl keeps every
    D <= 9 run inside that limit, and _solve rejects anything beyond it.
    """

    r_max: float
    n_r: int
    t_final: float
    r_min: float = 0.0
    cfl: float = 0.45
    scheme: str = "leapfrog"
    nonlinearity: str = "none"
    custom_f: Optional[Callable[[np.ndarray], np.ndarray]] = None
    custom_c: Optional[float] = None
    store_every: int = 1
    blowup_threshold: float = 1e8

    def __post_init__(self) -> None:
        if not self.r_max > self.r_min >= 0:
            raise ValueError("need r_max > r_min >= 0")
        if self.n_r < 8:
            raise ValueError("grid too small to carry the stencil")
        if not 0 < self.cfl < 1:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(
                f"nonlinearity must be one of {NONLINEARITIES}, got {self.nonlinearity!r}"
            )
        if self.nonlinearity == "custom":
            if self.custom_f is None or self.custom_c is None:
                raise ValueError("custom nonlinearity needs custom_f and its constant custom_c")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / (self.n_r - 1)

    @property
    def dt(self) -> float:
        return self.cfl * self.dr

    def radial_grid(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_r)


@dataclass(frozen=True, eq=False)
class RadialGridField:
    """One time slice (u, u_t) of a radial profile in lifted dimension D."""

    r: np.ndarray
    u: np.ndarray
    ut: np.ndarray
    lifted_dim: int
    descriptor: Optional[ExteriorDescriptor] = None

    def __post_init__(self) -> None:
        r = np.asarray(self.r, dtype=float)
        u = np.asarray(self.u, dtype=float)
        ut = np.asarray(self.ut, dtype=float)
        for name, arr in (("r", r), ("u", u), ("ut", ut)):
            object.__setattr__(self, name, arr)
        if r.ndim != 1 or r.size < 2:
            raise ValueError("radial grid must be a 1-d array with >= 2 nodes")
        steps = np.diff(r)
        if not np.allclose(steps, steps[0], rtol=1e-12, atol=0) or steps[0] <= 0:
            raise ValueError("radial grid must be uniform and increasing")
        if r[0] < 0:
            raise ValueError("radial grid must start at r >= 0")
        if u.shape != r.shape or ut.shape != r.shape:
            raise ValueError("u and ut must match the radial grid shape")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(ut))):
            raise ValueError("field values must be finite")
        if self.lifted_dim < 2:
            raise ValueError("lifted dimension must be >= 2")

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    def ur(self) -> np.ndarray:
        """Second-order radial derivative on the grid."""
        return np.gradient(self.u, self.dr, edge_order=2)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Stored snapshots of one evolution, at uniform stored cadence."""

    times: np.ndarray
    fields: tuple[RadialGridField, ...]
    spec: ModeSpec
    config: SolverConfig
    blown_up: bool = False

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        if times.ndim != 1 or times.size != len(self.fields):
            raise ValueError("one stored field per stored time required")
        if times.size >= 2:
            steps = np.diff(times)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-15) or steps[0] <= 0:
                raise ValueError("stored times must be uniform and increasing")

    @property
    def descriptor(self) -> Optional[ExteriorDescriptor]:
        return self.fields[0].descriptor

    @property
    def dr(self) -> float:
        return self.fields[0].dr

    @property
    def r(self) -> np.ndarray:
        return self.fields[0].r

    def clean_radius(self, t: float) -> float:
        """Largest radius exactly independent of the outer-edge closure.

        With descriptor ghosts the closure is exact everywhere; with
        extrapolated ghosts the stencil imports one cell per step.
        """
        if self.descriptor is not None:
            return math.inf
        return self.config.r_max - abs(t) / self.config.cfl - 2 * self.dr


# ---------------------------------------------------------------------------
# initial data builders


def field_from_callables(
    config: SolverConfig,
    u0: Callable[[np.ndarray], np.ndarray],
    u1: Callable[[np.ndarray], np.ndarray],
    lifted_dim: int,
    descriptor: Optional[ExteriorDescriptor] = None,
) -> RadialGridField:
    r = config.radial_grid()
    return RadialGridField(
        r=r,
        u=np.asarray(u0(r), dtype=float),
        ut=np.asarray(u1(r), dtype=float),
        lifted_dim=lifted_dim,
        descriptor=descriptor,
    )


def lifted_field_from_mode(data: ExteriorModeData, config: SolverConfig) -> RadialGridField:
    """Sample the mode's lifted profile, blending C1-smoothly inside R.

    The blend acts on the lifted profile (not the raw coefficient), so
    the sampled data is even and regular at the origin in the lifted
    dimension D = d + 2 nu.  Outside R it is the exact power-law data;
    finite speed keeps exterior-cone quantities extension-independent.
    """
    spec = data.spec
    nu, mu, R = spec.nu, spec.mu, data.R
    if config.r_max <= R:
        raise ValueError("grid must extend past the data radius R")
    p = data.position_poly().to_float()
    q = data.velocity_poly().to_float()
    zR = 1.0 / R
    u0R = R ** (-mu) * p(zR)
    du0R = R ** (-mu - 1) * (-mu * p(zR) - zR * p.deriv()(zR))
    u1R = R ** (-mu - 1) * q(zR)
    du1R = R ** (-mu - 2) * (-(mu + 1) * q(zR) - zR * q.deriv()(zR))
    # lifted values w = r^-nu * coefficient and their radial slopes at R
    w0R = R ** (-nu) * u0R
    dw0R = R ** (-nu) * (du0R - nu * u0R / R)
    w1R = R ** (-nu) * u1R
    dw1R = R ** (-nu) * (du1R - nu * u1R / R)
    b0, b1 = dw0R / (2 * R), dw1R / (2 * R)
    a0, a1 = w0R - b0 * R**2, w1R - b1 * R**2

    r = config.radial_grid()
    outside = r >= R
    safe = np.where(outside, r, R)
    z = 1.0 / safe
    u = np.where(outside, safe ** (-mu - nu) * p(z), a0 + b0 * r**2)
    ut = np.where(outside, safe ** (-mu - 1 - nu) * q(z), a1 + b1 * r**2)
    return RadialGridField(
        r=r,
        u=u,
        ut=ut,
        lifted_dim=spec.lifted_dim,
        descriptor=descriptor_for_mode(data),
    )


def gaussian_bump(
    config: SolverConfig, amplitude: float, width: float, lifted_dim: int = 3
) -> RadialGridField:
    """Even Gaussian position data with zero velocity."""
    r = config.radial_grid()
    return RadialGridField(
        r=r,
        u=amplitude * np.exp(-((r / width) ** 2)),
        ut=np.zeros_like(r),
        lifted_dim=lifted_dim,
        descriptor=None,
    )


# ---------------------------------------------------------------------------
# schemes


def _nonlinear_term(config: SolverConfig) -> Callable[[np.ndarray], np.ndarray]:
    if config.nonlinearity == "none":
        return lambda u: 0.0
    if config.nonlinearity == "defocusing_quintic":
        return lambda u: -(u**5)
    if config.nonlinearity == "focusing_quintic":
        return lambda u: u**5
    return config.custom_f


def _ghost_value(
    u: np.ndarray, r_ghost: float, t: float, descriptor: Optional[ExteriorDescriptor]
) -> float:
    if descriptor is not None:
        return float(descriptor.eval(r_ghost, t).u)
    return 3.0 * u[-1] - 3.0 * u[-2] + u[-3]


def _spatial_operator(
    u: np.ndarray,
    r: np.ndarray,
    dr: float,
    D: int,
    t: float,
    descriptor: Optional[ExteriorDescriptor],
) -> np.ndarray:
    """u_rr + ((D-1)/r) u_r with parity, one-sided, and ghost closures."""
    out = np.empty_like(u)
    inv_dr2 = 1.0 / dr**2
    out[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) * inv_dr2 + (D - 1) / r[1:-1] * (
        u[2:] - u[:-2]
    ) / (2 * dr)
    if r[0] == 0.0:
        # even parity: operator limit is D * u_rr at the origin
        out[0] = D * 2.0 * (u[1] - u[0]) * inv_dr2
    else:
        urr = (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) * inv_dr2
        ur = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * dr)
        out[0] = urr + (D - 1) / r[0] * ur
    g = _ghost_value(u, r[-1] + dr, t, descriptor)
    out[-1] = (g - 2 * u[-1] + u[-2]) * inv_dr2 + (D - 1) / r[-1] * (g - u[-2]) / (2 * dr)
    return out


def _solve(initial: RadialGridField, config: SolverConfig, spec: ModeSpec) -> Trajectory:
    r = config.radial_grid()
    if initial.r.shape != r.shape or not np.allclose(initial.r, r, rtol=1e-12):
        raise ValueError("initial data grid does not match the solver configuration")
    D = initial.lifted_dim
    desc = initial.descriptor
    dr, dt = config.dr, config.dt
    if dt > dr * math.sqrt(2.0 / D) * (1 + 1e-12):
        raise ValueError(
            f"cfl={config.cfl} is unstable for lifted dimension {D}; "
            f"the origin closure requires cfl <= sqrt(2/D) = {math.sqrt(2.0 / D):.4f}"
        )
    # whole number of stored strides, so the snapshot cadence is uniform
    n_raw = max(1, int(round(config.t_final / dt)))
    stride = min(config.store_every, n_raw)
    n_steps = stride * math.ceil(n_raw / stride)
    F = _nonlinear_term(config)

    def rhs(u: np.ndarray, t: float) -> np.ndarray:
        return _spatial_operator(u, r, dr, D, t, desc) + F(u)

    stored_t: list[float] = [0.0]
    stored: list[RadialGridField] = [initial]
    blown_up = False

    def snap(t: float, u: np.ndarray, ut: np.ndarray) -> None:
        stored_t.append(t)
        stored.append(
            RadialGridField(r=r, u=u.copy(), ut=ut.copy(), lifted_dim=D, descriptor=desc)
        )

    def healthy(u: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(u)) and np.max(np.abs(u)) <= config.blowup_threshold)

    if config.scheme == "leapfrog":
        u_prev = initial.u.copy()
        u_curr = u_prev + dt * initial.ut + 0.5 * dt**2 * rhs(u_prev, 0.0)
        if not healthy(u_curr):
            blown_up = True
            n_steps = 0
        n = 1
        while n <= n_steps and not blown_up:
            u_next = 2 * u_curr - u_prev + dt**2 * rhs(u_curr, n * dt)
            if not healthy(u_next):
                blown_up = True
                break
            if n % stride == 0:
                snap(n * dt, u_curr, (u_next - u_prev) / (2 * dt))
            u_prev, u_curr = u_curr, u_next
            n += 1
    else:  # rk4_mol
        u = initial.u.copy()
        v = initial.ut.copy()
        for n in range(1, n_steps + 1):
            t = (n - 1) * dt
            k1u, k1v = v, rhs(u, t)
            k2u, k2v = v + 0.5 * dt * k1v, rhs(u + 0.5 * dt * k1u, t + 0.5 * dt)
            k3u, k3v = v + 0.5 * dt * k2v, rhs(u + 0.5 * dt * k2u, t + 0.5 * dt)
            k4u, k4v = v + dt * k3v, rhs(u + dt * k3u, t + dt)
            u = u + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
            v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            if not healthy(u):
                blown_up = True
                break
            if n % stride == 0:
                snap(n * dt, u, v)

    return Trajectory(
        times=np.asarray(stored_t),
        fields=tuple(stored),
        spec=spec,
        config=config,
        blown_up=blown_up,
    )


def solve_mode_linear(initial: RadialGridField, config: SolverConfig) -> Trajectory:
    """Evolve the lifted linear equation u_tt = u_rr + ((D-1)/r) u_r."""
    if config.nonlinearity != "none":
        raise ValueError("linear solves take nonlinearity='none'")
    d, nu = _spec_guess(initial.lifted_dim)
    return _solve(initial, config, ModeSpec(d, nu))


def solve_quintic(initial: RadialGridField, config: SolverConfig) -> Trajectory:
    """Evolve the d = 3 radial equation u_tt = u_rr + (2/r)u_r + F(u)."""
    if initial.lifted_dim != 3:
        raise ValueError("the quintic solver is for physical d = 3 radial fields")
    if config.nonlinearity == "none":
        raise ValueError("quintic solves need a nonlinearity; use solve_mode_linear")
    return _solve(initial, config, ModeSpec(3, 0))


def _spec_guess(D: int) -> tuple[int, int]:
    # any (d, nu) with d + 2 nu = D represents the same lifted equation;
    # report the radial one of matching parity
    if D >= 3:
        return (3, (D - 3) // 2) if D % 2 == 1 else (4, (D - 4) // 2)
    return (2, 0)


# ---------------------------------------------------------------------------
# diagnostics


def total_energy(fld: RadialGridField, nonlinearity: str = "none") -> float:
    """int (u_t^2 + u_r^2 + potential) r^(D-1) dr on the grid.

    Doubled-energy convention; defocusing potential u^6/3, focusing
    -u^6/3.  This is the conserved functional of the flow when no flux
    crosses the edges.
    """
    pot = {
        "none": lambda u: 0.0,
        "defocusing_quintic": lambda u: u**6 / 3.0,
        "focusing_quintic": lambda u: -(u**6) / 3.0,
    }
    if nonlinearity not in pot:
        raise ValueError(f"no conserved functional known for {nonlinearity!r}")
    dens = (fld.ut**2 + fld.ur() ** 2 + pot[nonlinearity](fld.u)) * fld.r ** (
        fld.lifted_dim - 1
    )
    return float(np.trapezoid(dens, dx=fld.dr))


def energy_series(traj: Trajectory) -> np.ndarray:
    """Total grid energy at every stored time."""
    return np.asarray(
        [total_energy(f, traj.config.nonlinearity) for f in traj.fields]
    )


def _check_clean(traj: Trajectory, t: float, fld: RadialGridField) -> None:
    rc = traj.clean_radius(t)
    if rc >= traj.config.r_max:
        return
    band = fld.r >= rc
    scale = max(np.max(np.abs(fld.u)), np.max(np.abs(fld.ut)), 1e-300)
    if np.max(np.abs(fld.u[band])) > 1e-11 * scale or np.max(
        np.abs(fld.ut[band])
    ) > 1e-11 * scale:
        raise ValueError(
            f"outer-edge contamination reaches the diagnostic region at t={t:g}; "
            "enlarge r_max or supply descriptor ghosts"
        )


def _moving_tail_integral(fld: RadialGridField, a: float, integrand: np.ndarray) -> float:
    """Trapezoid of integrand over [a, r_max] with an interpolated endpoint."""
    r = fld.r
    if a >= r[-1]:
        return 0.0
    if a <= r[0]:
        return float(np.trapezoid(integrand, dx=fld.dr))
    j = int(np.searchsorted(r, a, side="left"))
    total = float(np.trapezoid(integrand[j:], dx=fld.dr)) if j < r.size - 1 else 0.0
    if j >= 1 and r[j] > a:
        w = (r[j] - a) / fld.dr
        f_a = integrand[j - 1] + (integrand[j] - integrand[j - 1]) * (a - r[j - 1]) / fld.dr
        total += 0.5 * (f_a + integrand[j]) * (r[j] - a)
    return total


@dataclass(frozen=True, eq=False)
class ConeEnergySeries:
    """Exterior-cone energy samples E(t), with truncation bookkeeping."""

    times: np.ndarray
    values: np.ndarray
    truncated: bool


def cone_energy(traj: Trajectory, R: float) -> ConeEnergySeries:
    """E(t) = int_{R+|t|}^inf (u_t^2 + u_r^2) r^(D-1) dr along the run.

    The grid part is a trapezoid with linear interpolation at the
    moving endpoint; beyond r_max the exact descriptor tail is added
    when available, otherwise the series is flagged truncated.  Times
    whose exterior region is contaminated by the outer closure are
    rejected outright.
    """
    if R <= 0:
        raise ValueError("cone radius must be positive")
    D = traj.fields[0].lifted_dim
    desc = traj.descriptor
    vals = []
    for t, fld in zip(traj.times, traj.fields):
        _check_clean(traj, t, fld)
        integrand = (fld.ut**2 + fld.ur() ** 2) * fld.r ** (D - 1)
        e = _moving_tail_integral(fld, R + abs(t), integrand)
        if desc is not None:
            e += desc.exterior_energy(max(traj.config.r_max, R + abs(t)), t)
        vals.append(e)
    return ConeEnergySeries(
        times=traj.times.copy(),
        values=np.asarray(vals),
        truncated=desc is None,
    )


def _require_physical_3d(traj: Trajectory) -> None:
    if traj.fields[0].lifted_dim != 3:
        raise ValueError("physical-space diagnostics require d = 3 radial runs")


@dataclass(frozen=True)
class YNormEstimate:
    """Critical-norm tail over the computed window, with a window report."""

    value: float
    half_window_value: float
    window_delta_rel: float
    truncated: bool


def ynorm_estimate(traj: Trajectory, r: float) -> YNormEstimate:
    """(int_t [int_{|x|>r+|t|} u^10 dx]^(1/2) dt)^(1/5) over the run window.

    Physical-space integral: the dx carries 4 pi rho^2 d rho.  The half
    window value is reported so callers can judge convergence of the
    time integral.
    """
    _require_physical_3d(traj)
    if r <= 0:
        raise ValueError("tail radius must be positive")
    g = []
    for t, fld in zip(traj.times, traj.fields):
        _check_clean(traj, t, fld)
        integrand = 4.0 * math.pi * fld.u**10 * fld.r**2
        g.append(math.sqrt(_moving_tail_integral(fld, r + abs(t), integrand)))
    g = np.asarray(g)
    full = float(np.trapezoid(g, x=traj.times)) if traj.times.size > 1 else 0.0
    # window report: same quadrature with the far |t| half removed
    half_mask = np.abs(traj.times) <= 0.5 * np.max(np.abs(traj.times)) + 1e-12
    half = (
        float(np.trapezoid(g[half_mask], x=traj.times[half_mask]))
        if np.sum(half_mask) > 1
        else 0.0
    )
    value = full**0.2
    half_value = half**0.2
    delta = abs(value - half_value) / value if value > 0 else 0.0
    # the moving integral always stops at the grid edge; flag whenever
    # that edge actually cut the domain of integration
    cut = bool(np.any(r + np.abs(traj.times) < traj.config.r_max))
    return YNormEstimate(
        value=value,
        half_window_value=half_value,
        window_delta_rel=delta,
        truncated=cut,
    )


def l6_tail(traj: Trajectory, r: float) -> float:
    """max over stored times of int_{|x|>r+|t|} u^6 dx (physical d = 3)."""
    _require_physical_3d(traj)
    if r <= 0:
        raise ValueError("tail radius must be positive")
    worst = 0.0
    for t, fld in zip(traj.times, traj.fields):
        _check_clean(traj, t, fld)
        integrand = 4.0 * math.pi * fld.u**6 * fld.r**2
        worst = max(worst, _moving_tail_integral(fld, r + abs(t), integrand))
    return worst
