"""Radiation fields of radial waves in three space dimensions.

The reduction w = r u turns a finite-energy radial pair (u0, u1) into
odd line data, and the evolution into free 1d transport.  The past
radiation field g(s) determines the data up to the static 1/r kernel,
carries exactly half of the doubled energy, and its mass outside a
radius balances the late-time exterior cone energies.  This module
holds the forward and inverse maps, the tail functionals, and the
numeric machinery (Richardson limits, profile extraction from runs)
needed to test that balance on computed solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .exact_evolution import ExteriorDescriptor
from .exterior_basis import ExteriorModeData, eval_extended
from .radial_solver import RadialGridField, SolverConfig, Trajectory, cone_energy, solve_mode_linear

# Doubled-energy ratio int (u0'^2 + u1^2) r^2 dr / (2 int g^2 ds), exact
# for finite-energy data; frozen and enforced by a regression test.
RADIATION_ISOMETRY_CONSTANT = 1.0


def _gradient4(f: np.ndarray, dx: float) -> np.ndarray:
    """First derivative on a uniform grid, fourth order inside.

    The two cells at each edge use one-sided fourth-order stencils, so
    smooth data keeps O(dx^4) accuracy all the way to the boundary.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size < 6:
        raise ValueError("need a 1-d array with at least 6 samples")
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * dx)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * dx)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * dx)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * dx)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * dx)
    return out


@dataclass(frozen=True, eq=False)
class RadiationProfile:
    """A line profile g(s) sampled on an increasing grid."""

    s: np.ndarray
    g: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.s, dtype=float)
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "g", g)
        if s.ndim != 1 or s.size < 2 or g.shape != s.shape:
            raise ValueError("profile needs matching 1-d s and g arrays")
        if not np.all(np.diff(s) > 0):
            raise ValueError("s grid must be strictly increasing")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(g))):
            raise ValueError("profile samples must be finite")

    def norm2(self) -> float:
        """int g(s)^2 ds over the sampled window."""
        return float(np.trapezoid(self.g**2, x=self.s))

    def mean(self) -> float:
        """int g(s) ds; equals the 1/r coefficient of the inverse data."""
        return float(np.trapezoid(self.g, x=self.s))

    def tail2(self, r: float) -> float:
        """int_{|s| > r} g(s)^2 ds with interpolated cut points."""
        if r < 0:
            raise ValueError("tail radius must be nonnegative")
        if r == 0.0:
            return self.norm2()
        f = self.g**2
        # right tail [r, s_max] plus left tail [s_min, -r]
        total = _clipped_integral(self.s, f, r, np.inf)
        total += _clipped_integral(self.s, f, -np.inf, -r)
        return total


def _clipped_integral(x: np.ndarray, f: np.ndarray, lo: float, hi: float) -> float:
    """Integral of samples (x, f) restricted to [lo, hi].

    Simpson on the clipped window; the cut endpoints are inserted by
    interpolation, so accuracy near a cut is limited by that local
    linearization rather than by the window length.
    """
    lo = max(lo, float(x[0]))
    hi = min(hi, float(x[-1]))
    if hi <= lo:
        return 0.0
    xs = np.unique(np.concatenate([[lo], x[(x > lo) & (x < hi)], [hi]]))
    fs = np.interp(xs, x, f)
    if xs.size < 4:
        return float(np.trapezoid(fs, x=xs))
    return float(integrate.simpson(fs, x=xs))


def tail_S(profile: RadiationProfile, r: float) -> float:
    """sqrt(4 pi int_{|s|>r} g^2 ds), the physical tail mass."""
    return math.sqrt(4.0 * math.pi * profile.tail2(r))


def forward_map(
    r: np.ndarray,
    u0: np.ndarray,
    u1: np.ndarray,
    du0: Optional[np.ndarray] = None,
) -> RadiationProfile:
    """Past radiation field of radial data: g(+-r) = ((r u0)' +- r u1) / 2.

    The radial grid must be uniform.  When du0 is omitted, (r u0)' is
    formed with the fourth-order stencil; passing the exact derivative
    removes that error entirely.
    """
    r = np.asarray(r, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    steps = np.diff(r)
    if r.ndim != 1 or r.size < 6 or not np.all(steps > 0):
        raise ValueError("need an increasing 1-d radial grid with >= 6 nodes")
    # rounding of grid construction jitters steps by ~eps * r_max
    slack = 64.0 * np.finfo(float).eps * max(abs(float(r[0])), abs(float(r[-1])))
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=slack):
        raise ValueError("radial grid must be uniform")
    if r[0] < 0:
        raise ValueError("radial grid must start at r >= 0")
    if du0 is None:
        w0p = _gradient4(r * u0, float(steps[0]))
    else:
        w0p = u0 + r * np.asarray(du0, dtype=float)
    w1 = r * u1
    g_plus = 0.5 * (w0p + w1)
    g_minus = 0.5 * (w0p - w1)
    if r[0] == 0.0:
        s = np.concatenate([-r[:0:-1], r])
        g = np.concatenate([g_minus[:0:-1], g_plus])
        # both one-sided limits at s = 0 equal u0(0)/2; keep the mean
        g[r.size - 1] = 0.5 * (g_plus[0] + g_minus[0])
    else:
        # synthesize the center sample: w0'(0) = u0(0), and u0 is even
        # in r, so extrapolate it quadratically in r^2 (small weights,
        # no derivative noise)
        x = r[:3] ** 2
        w = np.array(
            [
                np.prod([x[k] / (x[k] - x[j]) for k in range(3) if k != j])
                for j in range(3)
            ]
        )
        g_center = 0.5 * float(w @ u0[:3])
        s = np.concatenate([-r[::-1], [0.0], r])
        g = np.concatenate([g_minus[::-1], [g_center], g_plus])
    return RadiationProfile(s=s, g=g)


def mode_profile(data: ExteriorModeData, r: np.ndarray) -> RadiationProfile:
    """Forward map of a blended mode, using its exact radial derivative."""
    if data.spec.d != 3:
        raise ValueError("radiation fields are defined for d = 3 data")
    vals = eval_extended(data, r)
    return forward_map(r, vals.u0, vals.u1, du0=vals.du0_dr)


def _cumulative4(f: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral on a uniform grid, fourth order.

    Each cell integrates the cubic through its four nearest samples;
    the result has len(f) entries and starts at zero.
    """
    f = np.asarray(f, dtype=float)
    if f.size < 4:
        raise ValueError("need at least 4 samples")
    seg = np.empty(f.size - 1)
    seg[0] = dx * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24.0
    seg[1:-1] = dx * (-f[:-3] + 13 * f[1:-2] + 13 * f[2:-1] - f[3:]) / 24.0
    seg[-1] = dx * (f[-4] - 5 * f[-3] + 19 * f[-2] + 9 * f[-1]) / 24.0
    return np.concatenate([[0.0], np.cumsum(seg)])


@dataclass(frozen=True, eq=False)
class RadialData:
    """Radial Cauchy data recovered from a radiation profile."""

    r: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    charge: float


def inverse_map(profile: RadiationProfile) -> RadialData:
    """Reconstruct (u0, u1) on r > 0 from the past radiation field.

    w0' and w1 come from the even/odd parts of g, and w0 is integrated
    from the origin (w0(0) = 0 for bounded u0).  The 1/r coefficient of
    u0 is not free: it equals int g ds and is reported as charge.  The
    profile must have decayed by the edges of its window or the
    reconstruction is truncated there.
    """
    s, g = profile.s, profile.g
    rpos = s[s > 0]
    if rpos.size < 2:
        raise ValueError("profile carries no positive-s samples")
    gp = np.interp(rpos, s, g)
    gm = np.interp(-rpos, s, g)
    w0p = gp + gm
    w1 = gp - gm
    # anchor the cumulative at w0(0) = 0; prepend the origin node
    g0 = np.interp(0.0, s, g)
    r_full = np.concatenate([[0.0], rpos])
    w0p_full = np.concatenate([[2.0 * g0], w0p])
    steps = np.diff(r_full)
    if np.allclose(steps, steps[0], rtol=1e-10, atol=0) and r_full.size >= 4:
        w0 = _cumulative4(w0p_full, float(steps[0]))[1:]
    else:
        w0 = np.cumsum(0.5 * steps * (w0p_full[1:] + w0p_full[:-1]))
    return RadialData(
        r=rpos, u0=w0 / rpos, u1=w1 / rpos, charge=float(w0[-1])
    )


def future_profile(past: RadiationProfile) -> RadiationProfile:
    """The forward-time radiation field: g_+(s) = -g_-(-s)."""
    return RadiationProfile(s=-past.s[::-1], g=-past.g[::-1])


def split_radiation(
    profile: RadiationProfile, r: float
) -> tuple[RadiationProfile, RadiationProfile]:
    """Hard partition into |s| <= r and |s| > r pieces on the same grid."""
    if r <= 0:
        raise ValueError("split radius must be positive")
    inner_mask = np.abs(profile.s) <= r
    inner = RadiationProfile(s=profile.s, g=np.where(inner_mask, profile.g, 0.0))
    outer = RadiationProfile(s=profile.s, g=np.where(inner_mask, 0.0, profile.g))
    return inner, outer


def dyadic_split(
    profile: RadiationProfile, r0: float, n_bands: int
) -> tuple[RadiationProfile, ...]:
    """Core |s| <= r0 plus annuli r0 2^j < |s| <= r0 2^(j+1).

    The last band is open ended so the pieces always sum back to the
    profile.
    """
    if r0 <= 0 or n_bands < 1:
        raise ValueError("need a positive core radius and at least one band")
    a = np.abs(profile.s)
    masks = [a <= r0]
    for j in range(n_bands - 1):
        masks.append((a > r0 * 2**j) & (a <= r0 * 2 ** (j + 1)))
    masks.append(a > r0 * 2 ** (n_bands - 1))
    return tuple(
        RadiationProfile(s=profile.s, g=np.where(m, profile.g, 0.0)) for m in masks
    )


def data_norm2(
    r: np.ndarray,
    u0: np.ndarray,
    u1: np.ndarray,
    du0: Optional[np.ndarray] = None,
) -> float:
    """Doubled energy integral int (u0'^2 + u1^2) r^2 dr (no 4 pi)."""
    r = np.asarray(r, dtype=float)
    if du0 is None:
        w0p = _gradient4(r * np.asarray(u0, dtype=float), float(r[1] - r[0]))
        du0sq_r2 = (w0p - np.asarray(u0, dtype=float)) ** 2
    else:
        du0sq_r2 = (r * np.asarray(du0, dtype=float)) ** 2
    integrand = du0sq_r2 + (r * np.asarray(u1, dtype=float)) ** 2
    return float(np.trapezoid(integrand, x=r))


def isometry_ratio(
    r: np.ndarray,
    u0: np.ndarray,
    u1: np.ndarray,
    du0: Optional[np.ndarray] = None,
) -> float:
    """data_norm2 / (2 norm2 of the forward image); exactly 1 in the limit."""
    profile = forward_map(r, u0, u1, du0=du0)
    denom = 2.0 * profile.norm2()
    if denom == 0.0:
        raise ValueError("radiation-free data has no isometry ratio")
    return data_norm2(r, u0, u1, du0=du0) / denom


def extrapolate_to_zero(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Lagrange value at x = 0 of the polynomial through (xs, ys).

    Used as Richardson extrapolation with x = 1/t on energy samples.
    """
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need matching xs and ys with at least two nodes")
    if len(set(xs)) != len(xs):
        raise ValueError("extrapolation nodes must be distinct")
    total = 0.0
    for j, (xj, yj) in enumerate(zip(xs, ys)):
        w = 1.0
        for k, xk in enumerate(xs):
            if k != j:
                w *= xk / (xk - xj)
        total += w * yj
    return total


def extrapolated_exterior_energy(
    energy: Callable[[float], float], t_max: float, n_nodes: int = 4
) -> float:
    """Richardson limit of E(t) as t -> infinity from dyadic samples.

    Samples at t_max / 2^j, j = 0 .. n_nodes-1, extrapolated in 1/t.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    ts = [t_max / 2**j for j in range(n_nodes)]
    return extrapolate_to_zero([1.0 / t for t in ts], [energy(t) for t in ts])


def _series_lookup(times: np.ndarray, values: np.ndarray, t: float, dt: float) -> float:
    idx = int(np.argmin(np.abs(times - t)))
    if abs(float(times[idx]) - t) > 0.51 * dt:
        raise ValueError(
            f"no stored snapshot near t={t:g}; adjust store_every/t_final"
        )
    return float(values[idx])


@dataclass(frozen=True)
class ChannelBalance:
    """Both sides of the exterior energy balance, with context."""

    lhs: float
    rhs: float
    e_plus: float
    e_minus: float
    total: float

    @property
    def rel_gap(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0


def channel_identity_check(
    fld: RadialGridField,
    config: SolverConfig,
    R: float,
    du0: Optional[np.ndarray] = None,
    n_nodes: int = 4,
    reversed_descriptor: Optional[ExteriorDescriptor] = None,
) -> ChannelBalance:
    """Test 4 pi (E_+ + E_-) = 2 tail_S(R)^2 on a computed evolution.

    E_+- are the Richardson limits of the exterior cone energy for the
    forward and time-reversed runs; the right side comes from the
    forward map of the same initial data.  Both routes are independent:
    one is quadrature on the evolved grid, the other is algebra on the
    data.  `reversed_descriptor`, when given, supplies exact exterior
    ghosts for the time-reversed run (with u1 = 0 the forward
    descriptor serves both directions).
    """
    if fld.lifted_dim != 3:
        raise ValueError("the channel identity is a d = 3 statement")
    if R <= 0:
        raise ValueError("cone radius must be positive")
    t_nodes = [config.t_final / 2**j for j in range(n_nodes)]

    def limit_for(sign: float) -> float:
        data = RadialGridField(
            r=fld.r,
            u=fld.u,
            ut=sign * fld.ut,
            lifted_dim=3,
            descriptor=fld.descriptor if sign > 0 else reversed_descriptor,
        )
        traj = solve_mode_linear(data, config)
        series = cone_energy(traj, R)
        dt_store = float(traj.times[1] - traj.times[0]) if traj.times.size > 1 else config.dt
        es = [_series_lookup(traj.times, series.values, t, dt_store) for t in t_nodes]
        return extrapolate_to_zero([1.0 / t for t in t_nodes], es)

    e_plus = limit_for(1.0)
    e_minus = limit_for(-1.0)
    profile = forward_map(fld.r, fld.u, fld.ut, du0=du0)
    rhs = 2.0 * tail_S(profile, R) ** 2
    lhs = 4.0 * math.pi * (e_plus + e_minus)
    total = 4.0 * math.pi * data_norm2(fld.r, fld.u, fld.ut, du0=du0)
    return ChannelBalance(lhs=lhs, rhs=rhs, e_plus=e_plus, e_minus=e_minus, total=total)


def numeric_future_profile(
    traj: Trajectory,
    n_nodes: int = 4,
    n_s: int = 400,
    s_min: Optional[float] = None,
    s_max: Optional[float] = None,
) -> RadiationProfile:
    """Estimate g_+(s) from a run via r u_t sampled at s + t, t -> inf.

    Richardson in 1/t over dyadic node times t_end / 2^j.  The s window
    is the largest one every node time can serve from its clean region,
    optionally clamped by s_min/s_max.  The counterwave correction at a
    node decays like the data tail at radius s + 2t, so every node time
    must clear the backward cone of the support; few large nodes beat
    many small ones once the small ones dip inside it.
    """
    t_end = float(traj.times[-1])
    if t_end <= 0:
        raise ValueError("trajectory must reach a positive time")
    node_ts = [t_end / 2**j for j in range(n_nodes)]
    r = traj.r
    dt_store = float(traj.times[1] - traj.times[0]) if traj.times.size > 1 else 0.0
    s_lo = float(r[0]) - min(node_ts)
    s_hi = min(min(traj.clean_radius(t), float(r[-1])) - t for t in node_ts)
    if s_min is not None:
        s_lo = max(s_lo, float(s_min))
    if s_max is not None:
        s_hi = min(s_hi, float(s_max))
    if s_hi <= s_lo:
        raise ValueError("empty radiation window after clamping")
    if s_hi - s_lo < 0.1 * (r[-1] - r[0]) and s_min is None and s_max is None:
        raise ValueError("clean regions too small to extract a radiation window")
    s = np.linspace(s_lo, s_hi, n_s)
    samples = []
    for t in node_ts:
        idx = int(np.argmin(np.abs(traj.times - t)))
        if abs(float(traj.times[idx]) - t) > 0.51 * max(dt_store, 1e-300):
            raise ValueError(f"no stored snapshot near t={t:g}")
        f = traj.fields[idx]
        t_i = float(traj.times[idx])
        samples.append((1.0 / t_i, np.interp(s + t_i, r, r * f.ut)))
    xs = [x for x, _ in samples]
    g = np.zeros_like(s)
    for j, (xj, fj) in enumerate(samples):
        w = 1.0
        for k, (xk, _) in enumerate(samples):
            if k != j:
                w *= xk / (xk - xj)
        g += w * fj
    return RadiationProfile(s=s, g=g)
