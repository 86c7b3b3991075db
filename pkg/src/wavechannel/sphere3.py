"""Sampled spherical-harmonic analysis on the unit sphere for d = 3.

Real orthonormal harmonics Y_{l,m} on a Gauss-Legendre (in cos theta)
by uniform (in phi) product grid.  The product rule integrates
spherical polynomials of degree up to min(2*n_theta - 1, n_phi - 1)
exactly, which is what makes mode extraction trustworthy at desk-scale
band limits.

The mode projection of a field u at radius r is

    c(r)   = int_{S^2} u(r theta) Y_{l,m}(theta) dtheta,
    lifted = r^(-l) c(r),

and the lifted profile of a free wave is a radial solution in dimension
3 + 2l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy.special import lpmv

__all__ = [
    "SphereGrid",
    "SphereField",
    "ModeProfile",
    "sph_harm_eval",
    "analyze",
    "synthesize",
]


def _norm_constant(l: int, am: int) -> float:
    return math.sqrt(
        (2 * l + 1) / (4.0 * math.pi) * math.factorial(l - am) / math.factorial(l + am)
    )


def sph_harm_eval(l: int, m: int, theta, phi):
    """Real orthonormal spherical harmonic Y_{l,m}(theta, phi).

    m > 0 pairs with cos(m phi), m < 0 with sin(|m| phi); the unit
    normalization is int_{S^2} Y^2 = 1.  Sign conventions are
    irrelevant to every quadratic quantity downstream.
    """
    if l < 0:
        raise ValueError(f"degree must be nonnegative, got {l}")
    if abs(m) > l:
        raise ValueError(f"order |m| <= l required, got l={l}, m={m}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(m)
    base = _norm_constant(l, am) * lpmv(am, l, np.cos(theta))
    if m == 0:
        out = base * np.ones_like(phi)
    elif m > 0:
        out = math.sqrt(2.0) * base * np.cos(am * phi)
    else:
        out = math.sqrt(2.0) * base * np.sin(am * phi)
    return out


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre x uniform product quadrature on the unit sphere."""

    n_theta: int
    n_phi: int

    def __post_init__(self) -> None:
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("grid needs at least one node in each direction")

    @property
    def max_degree(self) -> int:
        """Largest spherical-polynomial degree integrated exactly."""
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    @cached_property
    def _theta_rule(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        return x, w

    @property
    def cos_theta(self) -> np.ndarray:
        return self._theta_rule[0]

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self._theta_rule[0])

    @property
    def theta_weights(self) -> np.ndarray:
        return self._theta_rule[1]

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @cached_property
    def weights(self) -> np.ndarray:
        """Combined weights, shape (n_theta, n_phi), summing to 4 pi."""
        return np.outer(self.theta_weights, np.full(self.n_phi, 2.0 * np.pi / self.n_phi))

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate over the sphere; trailing axes must be (n_theta, n_phi)."""
        values = np.asarray(values, dtype=float)
        if values.shape[-2:] != (self.n_theta, self.n_phi):
            raise ValueError(
                f"trailing axes must be {(self.n_theta, self.n_phi)}, got {values.shape}"
            )
        return np.einsum("...jk,jk->...", values, self.weights)

    def harmonic(self, l: int, m: int) -> np.ndarray:
        """Y_{l,m} sampled on the grid, shape (n_theta, n_phi)."""
        return _grid_harmonic(self, l, m)

    def resolves(self, degree: int) -> bool:
        return degree <= self.max_degree


@lru_cache(maxsize=512)
def _grid_harmonic(grid: SphereGrid, l: int, m: int) -> np.ndarray:
    theta = grid.theta[:, None]
    phi = grid.phi[None, :]
    vals = sph_harm_eval(l, m, theta, phi)
    vals.setflags(write=False)
    return vals


@dataclass(frozen=True, eq=False)
class SphereField:
    """Samples u(r_i, theta_j, phi_k) of a field on nested spheres."""

    grid: SphereGrid
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)
        if radii.ndim != 1 or radii.size == 0:
            raise ValueError("radial grid must be a nonempty 1-d array")
        if not np.all(radii > 0) or not np.all(np.diff(radii) > 0):
            raise ValueError("radial grid must be positive and strictly increasing")
        expected = (radii.size, self.grid.n_theta, self.grid.n_phi)
        if values.shape != expected:
            raise ValueError(f"values must have shape {expected}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")


@dataclass(frozen=True, eq=False)
class ModeProfile:
    """One (l, m) channel of a field: raw coefficient and lifted profile."""

    coefficient: np.ndarray
    lifted: np.ndarray


def analyze(field: SphereField, l: int, m: int) -> ModeProfile:
    """Project the field on Y_{l,m} at every radius.

    The grid must integrate degree-2l polynomials exactly, otherwise
    the projection would alias higher modes into the answer.
    """
    if not field.grid.resolves(2 * l):
        raise ValueError(
            f"grid resolves degree {field.grid.max_degree}, needs {2 * l} for l={l}"
        )
    y = field.grid.harmonic(l, m)
    c = field.grid.integrate(field.values * y[None, :, :])
    lifted = field.radii ** (-l) * c
    return ModeProfile(coefficient=c, lifted=lifted)


def synthesize(
    coefficients: Mapping[tuple[int, int], Sequence[float]],
    radii: Sequence[float],
    grid: SphereGrid,
) -> SphereField:
    """Assemble sum_{l,m} c_{l,m}(r) Y_{l,m}(theta) on the grid."""
    radii = np.asarray(radii, dtype=float)
    values = np.zeros((radii.size, grid.n_theta, grid.n_phi))
    for (l, m), c in coefficients.items():
        c = np.asarray(c, dtype=float)
        if c.shape != radii.shape:
            raise ValueError(
                f"coefficient for (l={l}, m={m}) must match the radial grid shape"
            )
        values += c[:, None, None] * grid.harmonic(l, m)[None, :, :]
    return SphereField(grid=grid, radii=radii, values=values)
