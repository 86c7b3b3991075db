"""Closed-form evolution of power-law exterior data in the lifted frame.

A mode with harmonic degree nu in dimension d, viewed through the
substitution u -> r^(-nu) u, becomes a radial field in the lifted
dimension D = d + 2*nu solving the free wave equation

    u_tt = u_rr + ((D-1)/r) u_r ,    r > 0.

Each admissible power-law datum r^(2k-D) evolves as a terminating
polynomial-in-t chain

    position:  f(r,t) = sum_j c_j t^(2j)   r^(2k-D-2j),   f(.,0) = r^(2k-D), f_t(.,0) = 0
    velocity:  g(r,t) = sum_j c_j t^(2j+1) r^(2k-D-2j),   g(.,0) = 0,        g_t(.,0) = r^(2k-D)

whose rational coefficients are fixed inductively by matching powers
under the operator.  The master correctness check is symbolic: applying
the operator term by term in exact arithmetic must cancel identically.

Because chains are finite monomial sums, the energy outside a light
cone has a closed form as well, and its vanishing as |t| grows is a
statement about integer growth exponents rather than quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence, Union

import numpy as np

from .exterior_basis import ExteriorModeData, ModeSpec

ArrayLike = Union[float, np.ndarray]

POSITION = "position"
VELOCITY = "velocity"

# (coefficient, t power, r power) with exact rational coefficient
Monomial = tuple[Fraction, int, int]


def max_admissible_k(D: int, kind: str) -> int:
    """Largest k whose chain has finite exterior energy in dimension D."""
    if kind == POSITION:
        return (D + 1) // 4
    if kind == VELOCITY:
        return (D - 1) // 4
    raise ValueError(f"kind must be {POSITION!r} or {VELOCITY!r}, got {kind!r}")


@dataclass(frozen=True)
class ChainSolution:
    """One terminating chain: exact evolution of a single power law."""

    spec: ModeSpec
    k: int
    kind: str
    c: tuple[Fraction, ...]

    @property
    def lifted_dim(self) -> int:
        return self.spec.lifted_dim

    def monomials(self) -> tuple[Monomial, ...]:
        """The chain as exact (coeff, t_power, r_power) monomials."""
        D = self.lifted_dim
        shift = 0 if self.kind == POSITION else 1
        return tuple(
            (cj, 2 * j + shift, 2 * self.k - D - 2 * j) for j, cj in enumerate(self.c)
        )


def chain_lift(spec: ModeSpec, k: int, kind: str) -> ChainSolution:
    """Determine the chain coefficients for the power-law datum r^(2k-D).

    position: c_{j+1} (2j+2)(2j+1) = c_j (2k-2j-D)(2k-2j-2)
    velocity: c_{j+1} (2j+3)(2j+2) = c_j (2k-2j-D)(2k-2j-2)

    with c_0 = 1; the factor (2k-2j-2) vanishes at j = k-1, so the
    chain has exactly k terms.
    """
    D = spec.lifted_dim
    kmax = max_admissible_k(D, kind)
    if not 1 <= k <= kmax:
        raise ValueError(
            f"k={k} outside admissible range [1, {kmax}] for D={D} {kind} data"
        )
    c = [Fraction(1)]
    for j in range(k - 1):
        num = Fraction((2 * k - 2 * j - D) * (2 * k - 2 * j - 2))
        den = (2 * j + 2) * (2 * j + 1) if kind == POSITION else (2 * j + 3) * (2 * j + 2)
        c.append(c[j] * num / den)
    return ChainSolution(spec=spec, k=k, kind=kind, c=tuple(c))


def _eval_monomials(
    terms: Iterable[Monomial], r: np.ndarray, t: float
) -> np.ndarray:
    out = np.zeros_like(r)
    for coeff, a, b in terms:
        out += float(coeff) * t**a * r**b
    return out


def _derivative_monomials(sol: ChainSolution) -> tuple[tuple[Monomial, ...], tuple[Monomial, ...]]:
    """Monomials of (u_t, u_r)."""
    ut: list[Monomial] = []
    ur: list[Monomial] = []
    for coeff, a, b in sol.monomials():
        if a >= 1:
            ut.append((coeff * a, a - 1, b))
        ur.append((coeff * b, a, b - 1))
    return tuple(ut), tuple(ur)


@dataclass(frozen=True)
class ExactValues:
    """Pointwise chain-sum values and first derivatives."""

    u: ArrayLike
    ut: ArrayLike
    ur: ArrayLike


def eval_exact(sol: ChainSolution, r: ArrayLike, t: float) -> ExactValues:
    """Evaluate the chain and its first derivatives at radius r, time t."""
    arr = np.asarray(r, dtype=float)
    if not np.all(arr > 0):
        raise ValueError("chain solutions live on r > 0")
    ut_terms, ur_terms = _derivative_monomials(sol)
    u = _eval_monomials(sol.monomials(), arr, float(t))
    ut = _eval_monomials(ut_terms, arr, float(t))
    ur = _eval_monomials(ur_terms, arr, float(t))
    if np.isscalar(r) or arr.ndim == 0:
        return ExactValues(float(u), float(ut), float(ur))
    return ExactValues(u, ut, ur)


def wave_residual(sol: ChainSolution) -> dict[tuple[int, int], Fraction]:
    """Symbolic residual of u_tt - u_rr - ((D-1)/r) u_r, power by power.

    A monomial t^a r^b contributes a(a-1) t^(a-2) r^b from the time part
    and -b(b+D-2) t^a r^(b-2) from the radial part.  The returned map
    holds the surviving (t_power, r_power) -> coefficient entries; an
    empty map certifies the chain exactly.
    """
    D = sol.lifted_dim
    acc: dict[tuple[int, int], Fraction] = {}

    def add(coeff: Fraction, a: int, b: int) -> None:
        if coeff == 0:
            return
        key = (a, b)
        acc[key] = acc.get(key, Fraction(0)) + coeff
        if acc[key] == 0:
            del acc[key]

    for coeff, a, b in sol.monomials():
        if a >= 2:
            add(coeff * a * (a - 1), a - 2, b)
        add(-coeff * b * (b + D - 2), a, b - 2)
    return acc


# ---------------------------------------------------------------------------
# exterior-cone energy in closed form


@dataclass(frozen=True)
class ConeEnergyTerm:
    """One collected term coeff * t^t_power * rho^base_power of E."""

    coeff: Fraction
    t_power: int
    base_power: int

    @property
    def growth_exponent(self) -> int:
        """Power of t carried by the term as |t| -> infinity with rho ~ |t|."""
        return self.t_power + self.base_power


def _energy_terms(
    terms: Sequence[tuple[float, ChainSolution]]
) -> tuple[int, tuple[tuple[float, int, int], ...]]:
    """Collect (coeff, t_power, rho_power) of int_rho^inf (ut^2+ur^2) r^(D-1) dr."""
    if not terms:
        return 0, ()
    D = terms[0][1].lifted_dim
    for _, sol in terms:
        if sol.lifted_dim != D:
            raise ValueError("all chains in a combination must share the lifted dimension")
    ut_all: list[tuple[float, int, int]] = []
    ur_all: list[tuple[float, int, int]] = []
    for weight, sol in terms:
        ut_terms, ur_terms = _derivative_monomials(sol)
        ut_all.extend((weight * float(c), a, b) for c, a, b in ut_terms)
        ur_all.extend((weight * float(c), a, b) for c, a, b in ur_terms)
    acc: dict[tuple[int, int], float] = {}
    for family in (ut_all, ur_all):
        for (c1, a1, b1), (c2, a2, b2) in product(family, family):
            m = b1 + b2 + D
            assert m < 0, "divergent exterior integral: inadmissible exponent"
            key = (a1 + a2, m)
            acc[key] = acc.get(key, 0.0) + c1 * c2 / (-m)
    collected = tuple((c, a, m) for (a, m), c in sorted(acc.items()) if c != 0.0)
    return D, collected


def cone_energy_terms(sol: ChainSolution) -> tuple[ConeEnergyTerm, ...]:
    """Exact closed form of E(t) = int_{R+|t|}^inf (ut^2+ur^2) r^(D-1) dr.

    Terms are coeff * t^t_power * (R+|t|)^base_power with every
    base_power <= -1; the growth exponents certify the limit at
    infinity symbolically.
    """
    D = sol.lifted_dim
    ut_terms, ur_terms = _derivative_monomials(sol)
    acc: dict[tuple[int, int], Fraction] = {}
    for family in (ut_terms, ur_terms):
        for (c1, a1, b1), (c2, a2, b2) in product(family, family):
            m = b1 + b2 + D
            assert m < 0, "divergent exterior integral: inadmissible exponent"
            key = (a1 + a2, m)
            acc[key] = acc.get(key, Fraction(0)) + c1 * c2 / (-m)
    return tuple(
        ConeEnergyTerm(coeff=c, t_power=a, base_power=m)
        for (a, m), c in sorted(acc.items())
        if c != 0
    )


def exact_cone_energy(sol: ChainSolution, R: float, t: float) -> float:
    """Energy outside the light cone {r > R + |t|} at time t, exactly."""
    if not R > 0:
        raise ValueError("cone base radius must be positive")
    rho = R + abs(t)
    total = 0.0
    for term in cone_energy_terms(sol):
        total += float(term.coeff) * float(t) ** term.t_power * rho**term.base_power
    return total


def exterior_energy(
    terms: Sequence[tuple[float, ChainSolution]], rho: float, t: float
) -> float:
    """Energy of a chain combination in {r > rho} at time t, exactly.

    Cross terms between chains are included; all chains must share D.
    """
    if not rho > 0:
        raise ValueError("exterior radius must be positive")
    _, collected = _energy_terms(terms)
    total = 0.0
    for c, a, m in collected:
        total += c * float(t) ** a * rho**m
    return total


# ---------------------------------------------------------------------------
# bridge from exterior mode data to chain combinations


def chains_for_mode(data: ExteriorModeData) -> tuple[tuple[float, ChainSolution], ...]:
    """Chains reproducing the mode's lifted exterior data.

    The lifted position profile is sum_k1 A[k1-1] r^(2k1-D) and the
    lifted velocity profile is sum_k2 B[k2-1] r^(2k2-D), so each
    coefficient pairs with the chain of matching index and kind.
    """
    spec = data.spec
    out: list[tuple[float, ChainSolution]] = []
    for k1, a in enumerate(data.A, start=1):
        out.append((a, chain_lift(spec, k1, POSITION)))
    for k2, b in enumerate(data.B, start=1):
        out.append((b, chain_lift(spec, k2, VELOCITY)))
    return tuple(out)


@dataclass(frozen=True)
class ExteriorDescriptor:
    """Exact lifted solution valid on the region r - |t| > valid_radius.

    Finite propagation speed makes the chain combination equal to the
    true evolution of any interior completion of the data there.
    """

    terms: tuple[tuple[float, ChainSolution], ...]
    valid_radius: float

    @property
    def lifted_dim(self) -> int:
        if not self.terms:
            raise ValueError("empty descriptor has no dimension")
        return self.terms[0][1].lifted_dim

    def covers(self, r: ArrayLike, t: float) -> np.ndarray:
        return np.asarray(r, dtype=float) - abs(t) > self.valid_radius

    def eval(self, r: ArrayLike, t: float) -> ExactValues:
        arr = np.asarray(r, dtype=float)
        u = np.zeros_like(arr)
        ut = np.zeros_like(arr)
        ur = np.zeros_like(arr)
        for weight, sol in self.terms:
            vals = eval_exact(sol, arr, t)
            u += weight * vals.u
            ut += weight * vals.ut
            ur += weight * vals.ur
        if np.isscalar(r) or np.asarray(r).ndim == 0:
            return ExactValues(float(u), float(ut), float(ur))
        return ExactValues(u, ut, ur)

    def exterior_energy(self, rho: float, t: float) -> float:
        return exterior_energy(self.terms, rho, t)


def descriptor_for_mode(data: ExteriorModeData) -> ExteriorDescriptor:
    """Exact exterior evolution of one mode's data, valid for r - |t| > R."""
    return ExteriorDescriptor(terms=chains_for_mode(data), valid_radius=data.R)
