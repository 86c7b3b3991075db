import math

import numpy as np
import pytest

from wavechannel import exact_evolution as ev
from wavechannel import exterior_basis as eb
from wavechannel import radial_solver as rs
from wavechannel import sphere3 as sph


def one_over_r_mode(R=1.0):
    return eb.build_exterior_mode(eb.ModeSpec(3, 0), R, A=[1.0])


def compact_bump(config, amplitude=0.5, support=4.0, lifted_dim=3):
    r = config.radial_grid()
    s = np.clip(r / support, 0.0, 1.0)
    u = amplitude * (1 - s**2) ** 4
    return rs.RadialGridField(
        r=r, u=u, ut=np.zeros_like(r), lifted_dim=lifted_dim, descriptor=None
    )


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            rs.SolverConfig(r_max=1.0, n_r=100, t_final=1.0, r_min=2.0)
        with pytest.raises(ValueError):
            rs.SolverConfig(r_max=10.0, n_r=4, t_final=1.0)
        with pytest.raises(ValueError):
            rs.SolverConfig(r_max=10.0, n_r=100, t_final=1.0, cfl=1.5)
        with pytest.raises(ValueError):
            rs.SolverConfig(r_max=10.0, n_r=100, t_final=1.0, scheme="euler")
        with pytest.raises(ValueError):
            rs.SolverConfig(r_max=10.0, n_r=100, t_final=1.0, nonlinearity="cubic")
        with pytest.raises(ValueError):
            rs.SolverConfig(r_max=10.0, n_r=100, t_final=1.0, nonlinearity="custom")
        with pytest.raises(ValueError):
            rs.SolverConfig(r_max=10.0, n_r=100, t_final=-1.0)

    def test_grid_derivations(self):
        cfg = rs.SolverConfig(r_max=10.0, n_r=101, t_final=1.0, cfl=0.5)
        assert cfg.dr == pytest.approx(0.1)
        assert cfg.dt == pytest.approx(0.05)
        grid = cfg.radial_grid()
        assert grid[0] == 0.0 and grid[-1] == 10.0 and grid.size == 101


class TestField:
    def test_validation(self):
        r = np.linspace(0, 1, 11)
        with pytest.raises(ValueError):
            rs.RadialGridField(r=r[::-1], u=np.zeros(11), ut=np.zeros(11), lifted_dim=3)
        with pytest.raises(ValueError):
            rs.RadialGridField(r=r, u=np.zeros(10), ut=np.zeros(11), lifted_dim=3)
        with pytest.raises(ValueError):
            rs.RadialGridField(r=r, u=np.full(11, np.nan), ut=np.zeros(11), lifted_dim=3)
        with pytest.raises(ValueError):
            rs.RadialGridField(r=r, u=np.zeros(11), ut=np.zeros(11), lifted_dim=1)
        bad = np.concatenate([np.linspace(0, 1, 10), [5.0]])
        with pytest.raises(ValueError):
            rs.RadialGridField(r=bad, u=np.zeros(11), ut=np.zeros(11), lifted_dim=3)

    def test_radial_derivative_second_order(self):
        r = np.linspace(0, 2, 201)
        fld = rs.RadialGridField(r=r, u=np.sin(r), ut=np.zeros_like(r), lifted_dim=3)
        err = np.max(np.abs(fld.ur() - np.cos(r)))
        assert err < 5e-5


class TestStaticExterior:
    """Data 1/r outside R with a C1 interior blend: the exterior stays put."""

    def make_run(self, t_final=3.0):
        cfg = rs.SolverConfig(r_max=16.0, n_r=1601, t_final=t_final, store_every=100)
        fld = rs.lifted_field_from_mode(one_over_r_mode(), cfg)
        return cfg, rs.solve_mode_linear(fld, cfg)

    def test_exterior_drift_tiny(self):
        cfg, traj = self.make_run()
        t_end = traj.times[-1]
        # region numerically uninfluenced by the evolving interior blend
        r_safe = 1.0 + t_end / cfg.cfl + 3 * cfg.dr
        mask = traj.r > r_safe
        assert np.sum(mask) > 50
        drift = np.max(np.abs(traj.fields[-1].u[mask] - 1.0 / traj.r[mask]))
        assert drift <= 1e-8
        assert np.max(np.abs(traj.fields[-1].ut[mask])) <= 1e-8

    def test_cone_energy_tracks_exact(self):
        cfg, traj = self.make_run()
        series = rs.cone_energy(traj, R=1.0)
        assert not series.truncated
        sol = ev.chain_lift(eb.ModeSpec(3, 0), 1, ev.POSITION)
        for t, e in zip(series.times, series.values):
            exact = ev.exact_cone_energy(sol, 1.0, float(t))
            assert e == pytest.approx(exact, rel=1e-3)


class TestDAlembertConvergence:
    @staticmethod
    def exact(r, t):
        # w = r u solves the 1d equation with odd data w0 = r exp(-r^2)
        def w0(x):
            return x * np.exp(-(x**2))

        out = np.empty_like(r)
        pos = r > 1e-12
        out[pos] = (w0(r[pos] + t) + w0(r[pos] - t)) / (2 * r[pos])
        if np.any(~pos):
            out[~pos] = np.exp(-(t**2)) * (1 - 2 * t**2)
        return out

    def run_error(self, n_r, scheme):
        cfg = rs.SolverConfig(
            r_max=20.0, n_r=n_r, t_final=3.0, scheme=scheme, store_every=10**9
        )
        fld = rs.field_from_callables(
            cfg, lambda r: np.exp(-(r**2)), lambda r: np.zeros_like(r), lifted_dim=3
        )
        traj = rs.solve_mode_linear(fld, cfg)
        t_end = float(traj.times[-1])
        mask = traj.r < 10.0
        return np.max(
            np.abs(traj.fields[-1].u[mask] - self.exact(traj.r[mask], t_end))
        )

    @pytest.mark.parametrize("scheme", ["leapfrog", "rk4_mol"])
    def test_second_order_convergence(self, scheme):
        e_coarse = self.run_error(401, scheme)
        e_fine = self.run_error(801, scheme)
        ratio = e_coarse / e_fine
        assert 3.6 <= ratio <= 4.4, (scheme, e_coarse, e_fine, ratio)


class TestChainAgreement:
    def run_error(self, n_r):
        spec = eb.ModeSpec(7, 0)
        data = eb.build_exterior_mode(spec, 1.0, A=[0.0, 1.0], B=[0.0])
        cfg = rs.SolverConfig(r_max=14.0, n_r=n_r, t_final=2.0, store_every=10**9)
        fld = rs.lifted_field_from_mode(data, cfg)
        traj = rs.solve_mode_linear(fld, cfg)
        t_end = float(traj.times[-1])
        r_safe = 1.0 + t_end / cfg.cfl + 3 * cfg.dr
        mask = traj.r > r_safe
        exact = traj.descriptor.eval(traj.r[mask], t_end)
        return np.max(np.abs(traj.fields[-1].u[mask] - exact.u))

    def test_matches_exact_chain_at_second_order(self):
        e_coarse = self.run_error(701)
        e_fine = self.run_error(1401)
        ratio = e_coarse / e_fine
        assert 3.4 <= ratio <= 4.6, (e_coarse, e_fine, ratio)


class TestBoundaryIndependence:
    def test_uncontaminated_region_identical(self):
        # same run closed by extrapolated ghosts vs zero ghosts: values
        # inside the numerical domain of dependence must agree exactly
        cfg = rs.SolverConfig(r_max=10.0, n_r=501, t_final=4.0, store_every=10**9)
        a = compact_bump(cfg)
        traj_a = rs.solve_mode_linear(a, cfg)
        zero_desc = ev.ExteriorDescriptor(terms=(), valid_radius=1.0)
        b = rs.RadialGridField(
            r=a.r, u=a.u, ut=a.ut, lifted_dim=3, descriptor=zero_desc
        )
        traj_b = rs.solve_mode_linear(b, cfg)
        t_end = float(traj_a.times[-1])
        rc = traj_a.clean_radius(t_end)
        mask = traj_a.r < rc
        diff = np.max(np.abs(traj_a.fields[-1].u[mask] - traj_b.fields[-1].u[mask]))
        assert diff == 0.0


class TestQuintic:
    def test_zero_data_stays_zero(self):
        cfg = rs.SolverConfig(
            r_max=10.0, n_r=201, t_final=2.0, nonlinearity="defocusing_quintic"
        )
        fld = compact_bump(cfg, amplitude=0.0)
        traj = rs.solve_quintic(fld, cfg)
        assert not traj.blown_up
        for f in traj.fields:
            assert np.all(f.u == 0.0) and np.all(f.ut == 0.0)

    def test_defocusing_energy_drift(self):
        cfg = rs.SolverConfig(
            r_max=30.0,
            n_r=1501,
            t_final=20.0,
            nonlinearity="defocusing_quintic",
            store_every=50,
        )
        fld = compact_bump(cfg, amplitude=0.8, support=3.0)
        traj = rs.solve_quintic(fld, cfg)
        assert not traj.blown_up
        energies = rs.energy_series(traj)
        drift = np.max(np.abs(energies - energies[0])) / energies[0]
        assert drift <= 1e-3

    def test_linear_energy_drift(self):
        cfg = rs.SolverConfig(r_max=30.0, n_r=2501, t_final=20.0, store_every=50)
        fld = compact_bump(cfg, amplitude=0.8, support=3.0)
        traj = rs.solve_mode_linear(fld, cfg)
        energies = rs.energy_series(traj)
        drift = np.max(np.abs(energies - energies[0])) / energies[0]
        assert drift <= 1e-4

    def test_finite_propagation_speed(self):
        cfg = rs.SolverConfig(
            r_max=16.0, n_r=801, t_final=4.0, nonlinearity="defocusing_quintic",
            store_every=10**9,
        )
        fld = compact_bump(cfg, amplitude=1.0, support=3.0)
        traj = rs.solve_quintic(fld, cfg)
        t_end = float(traj.times[-1])
        # influence moves exactly one cell per step, so past the numerical
        # cone the field is untouched, and past the physical cone it is
        # scheme leakage that refines away
        numerical = traj.r > 3.0 + t_end / cfg.cfl + 2 * cfg.dr
        assert np.sum(numerical) > 50
        assert np.all(traj.fields[-1].u[numerical] == 0.0)
        physical = traj.r > 3.0 + t_end + 4 * cfg.dr
        assert np.max(np.abs(traj.fields[-1].u[physical])) <= 1e-6

    def test_focusing_blowup_flagged(self):
        cfg = rs.SolverConfig(
            r_max=8.0,
            n_r=401,
            t_final=6.0,
            nonlinearity="focusing_quintic",
            blowup_threshold=1e6,
            store_every=10,
        )
        fld = compact_bump(cfg, amplitude=4.0, support=2.0)
        traj = rs.solve_quintic(fld, cfg)
        assert traj.blown_up
        assert traj.times[-1] < cfg.t_final
        for f in traj.fields:
            assert np.all(np.isfinite(f.u))

    def test_quintic_requires_physical_dimension(self):
        cfg = rs.SolverConfig(
            r_max=10.0, n_r=201, t_final=1.0, nonlinearity="defocusing_quintic"
        )
        fld = compact_bump(cfg, lifted_dim=5)
        with pytest.raises(ValueError):
            rs.solve_quintic(fld, cfg)
        with pytest.raises(ValueError):
            rs.solve_mode_linear(compact_bump(cfg), cfg)


class TestConeEnergy:
    def test_interior_data_zero_exterior_energy(self):
        cfg = rs.SolverConfig(r_max=24.0, n_r=801, t_final=5.0, store_every=100)
        fld = compact_bump(cfg, amplitude=1.0, support=4.0)
        traj = rs.solve_mode_linear(fld, cfg)
        series = rs.cone_energy(traj, R=6.0)
        assert series.truncated
        assert np.max(series.values) <= 1e-10

    def test_contaminated_cone_rejected(self):
        cfg = rs.SolverConfig(r_max=10.0, n_r=501, t_final=7.0, store_every=10**9)
        fld = compact_bump(cfg, amplitude=1.0, support=3.0)
        traj = rs.solve_mode_linear(fld, cfg)
        with pytest.raises(ValueError, match="contamination"):
            rs.cone_energy(traj, R=1.0)

    def test_rejects_bad_radius(self):
        cfg = rs.SolverConfig(r_max=10.0, n_r=201, t_final=1.0)
        traj = rs.solve_mode_linear(compact_bump(cfg), cfg)
        with pytest.raises(ValueError):
            rs.cone_energy(traj, R=0.0)


def frozen_one_over_r_trajectory(r_max=300.0, n_r=3001, t_half=16.0, n_t=161):
    cfg = rs.SolverConfig(r_max=r_max, n_r=n_r, t_final=t_half, r_min=r_max / (n_r - 1))
    r = cfg.radial_grid()
    times = np.linspace(-t_half, t_half, n_t)
    # 1/r is the stationary d=3 monopole mode; its descriptor certifies the
    # tail as exact so no outer-edge contamination accounting applies
    desc = ev.descriptor_for_mode(one_over_r_mode())
    fields = tuple(
        rs.RadialGridField(
            r=r, u=1.0 / r, ut=np.zeros_like(r), lifted_dim=3, descriptor=desc
        )
        for _ in times
    )
    return rs.Trajectory(
        times=times, fields=fields, spec=eb.ModeSpec(3, 0), config=cfg
    )


class TestCriticalNormTails:
    def test_ynorm_frozen_closed_form(self):
        traj = frozen_one_over_r_trajectory()
        r = 2.0
        est = rs.ynorm_estimate(traj, r)
        closed = (math.sqrt(4 * math.pi / 7) * 0.8) ** 0.2 * r**-0.5
        assert est.value == pytest.approx(closed, rel=1e-2)
        assert est.window_delta_rel < 1e-2
        assert est.truncated

    def test_l6_frozen_closed_form(self):
        traj = frozen_one_over_r_trajectory()
        r = 2.0
        val = rs.l6_tail(traj, r)
        assert val == pytest.approx(4 * math.pi / (3 * r**3), rel=1e-2)

    def test_zero_trajectory(self):
        cfg = rs.SolverConfig(r_max=10.0, n_r=201, t_final=1.0)
        fld = compact_bump(cfg, amplitude=0.0)
        traj = rs.solve_mode_linear(fld, cfg)
        assert rs.ynorm_estimate(traj, 1.0).value == 0.0
        assert rs.l6_tail(traj, 1.0) == 0.0

    def test_requires_physical_dimension(self):
        traj = frozen_one_over_r_trajectory(r_max=50.0, n_r=501, t_half=2.0, n_t=9)
        lifted = rs.Trajectory(
            times=traj.times,
            fields=tuple(
                rs.RadialGridField(r=f.r, u=f.u, ut=f.ut, lifted_dim=5)
                for f in traj.fields
            ),
            spec=eb.ModeSpec(3, 1),
            config=traj.config,
        )
        with pytest.raises(ValueError):
            rs.ynorm_estimate(lifted, 1.0)
        with pytest.raises(ValueError):
            rs.l6_tail(lifted, 1.0)

    def test_l6_tail_decreasing_in_radius(self):
        cfg = rs.SolverConfig(
            r_max=40.0,
            n_r=1001,
            t_final=4.0,
            nonlinearity="defocusing_quintic",
            store_every=20,
        )
        fld = compact_bump(cfg, amplitude=0.8, support=3.0)
        traj = rs.solve_quintic(fld, cfg)
        radii = [1.0, 2.0, 4.0, 8.0, 16.0]
        tails = [rs.l6_tail(traj, r) for r in radii]
        for a, b in zip(tails, tails[1:]):
            assert b <= a + 1e-18


class TestSphereBridge:
    """Lifted solve -> samples on nested spheres -> recovered mode profile."""

    def recovered_error(self, n_r):
        spec = eb.ModeSpec(3, 2)
        data = eb.build_exterior_mode(spec, 1.0, A=[0.5, 1.0], B=[0.25])
        cfg = rs.SolverConfig(r_max=12.0, n_r=n_r, t_final=2.0, store_every=10**9)
        fld = rs.lifted_field_from_mode(data, cfg)
        traj = rs.solve_mode_linear(fld, cfg)
        t_end = float(traj.times[-1])
        idx = np.flatnonzero((traj.r > 1.0 + t_end + 0.5) & (traj.r < 11.0))
        idx = idx[:: max(1, idx.size // 10)]
        radii = traj.r[idx]
        w_num = traj.fields[-1].u[idx]

        grid = sph.SphereGrid(12, 25)
        field = sph.synthesize({(2, 1): radii**2 * w_num}, radii, grid)
        rec = sph.analyze(field, 2, 1)
        # the transform pair must hand back the profile it was fed
        assert np.max(np.abs(rec.lifted - w_num)) <= 1e-10 * np.max(np.abs(w_num))
        leak = sph.analyze(field, 3, -2)
        assert np.max(np.abs(leak.coefficient)) <= 1e-10

        exact = np.array(
            [traj.descriptor.eval(float(rr), t_end).u for rr in radii]
        )
        return float(np.max(np.abs(rec.lifted - exact)))

    def test_recovered_mode_converges_to_exact(self):
        e_coarse = self.recovered_error(401)
        e_fine = self.recovered_error(801)
        ratio = e_coarse / e_fine
        assert 3.4 <= ratio <= 4.6, (e_coarse, e_fine, ratio)


class TestDuhamel:
    def test_source_representation(self):
        # v - S_L(data) must equal the 1d Duhamel integral of r F(v)
        cfg_nl = rs.SolverConfig(
            r_max=16.0,
            n_r=801,
            t_final=4.0,
            nonlinearity="defocusing_quintic",
            store_every=2,
        )
        cfg_lin = rs.SolverConfig(r_max=16.0, n_r=801, t_final=4.0, store_every=2)
        fld = compact_bump(cfg_nl, amplitude=0.9, support=3.0)
        traj_nl = rs.solve_quintic(fld, cfg_nl)
        traj_lin = rs.solve_mode_linear(
            rs.RadialGridField(r=fld.r, u=fld.u, ut=fld.ut, lifted_dim=3), cfg_lin
        )
        assert np.allclose(traj_nl.times, traj_lin.times)
        r = traj_nl.r
        t_end = float(traj_nl.times[-1])
        dr = traj_nl.dr

        # cumulative integral K(x) = int_0^x rho F(rho, tau) d rho per snapshot
        Ks = []
        for f in traj_nl.fields:
            g = r * -(f.u**5)
            K = np.concatenate([[0.0], np.cumsum((g[1:] + g[:-1]) * 0.5 * dr)])
            Ks.append(K)

        def k_interp(K, x):
            # the source rho F is odd in rho, so its antiderivative is even
            return np.interp(np.abs(x), r, K)

        r_eval = r[(r > 0.2) & (r < 10.0)]
        duh = np.zeros_like(r_eval)
        taus = traj_nl.times
        dtau = taus[1] - taus[0]
        for i, tau in enumerate(taus):
            s = t_end - tau
            if s <= 0:
                continue
            contrib = 0.5 * (
                k_interp(Ks[i], r_eval + s) - k_interp(Ks[i], r_eval - s)
            )
            weight = dtau if 0 < i < len(taus) - 1 else dtau / 2
            duh += weight * contrib
        w_diff = r_eval * (
            np.interp(r_eval, r, traj_nl.fields[-1].u)
            - np.interp(r_eval, r, traj_lin.fields[-1].u)
        )
        scale = np.max(np.abs(w_diff))
        assert scale > 1e-3  # the nonlinearity actually did something
        assert np.max(np.abs(w_diff - duh)) <= 0.02 * scale
