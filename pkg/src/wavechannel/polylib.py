"""Polynomial machinery with exact-rational and floating backends.

Two families orthogonal on [-1, 1] are provided: the Legendre
polynomials (weight dx) and a modified family orthogonal under the
shifted weight (x+1)dx.  Both come with exact coefficient
representations built from their derivative (Rodrigues-type)
definitions, stable three-term evaluation recurrences, projection and
Parseval helpers, and the interval sup / weighted-derivative
inequalities used by the exterior-decay estimates elsewhere in the
package.

Exact polynomials carry ``fractions.Fraction`` coefficients end to
end; floating polynomials carry floats.  The two representations never
mix inside one value: conversions are explicit via ``to_float`` /
``to_exact``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "Poly",
    "QuadratureRule",
    "LemmaCheck",
    "gauss_nodes",
    "legendre_eval",
    "modified_legendre_eval",
    "legendre_poly",
    "legendre_poly_rodrigues",
    "modified_legendre_poly",
    "modified_legendre_ode_residual",
    "family_norm2",
    "project",
    "reconstruct",
    "lemma_check",
    "lemma_check_unit",
]

_EXACT_TYPES = (int, Fraction)

# Projection degree guard; families are cached per degree and the exact
# integrals grow quadratically with it.
MAX_PROJECT_DEGREE = 120


def _is_exact_scalar(c) -> bool:
    if isinstance(c, bool):
        return False
    return isinstance(c, _EXACT_TYPES) or isinstance(c, np.integer)


class Poly:
    """Dense univariate polynomial, ascending coefficients.

    Coefficients are either all exact (``int`` / ``Fraction``, stored
    as ``Fraction``) or all floats.  Trailing zeros are stripped; the
    zero polynomial is stored as a single zero coefficient.
    """

    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs):
        coeffs = list(coeffs)
        if not coeffs:
            coeffs = [0]
        if all(_is_exact_scalar(c) for c in coeffs):
            coeffs = [Fraction(c) for c in coeffs]
            exact = True
        elif any(_is_exact_scalar(c) for c in coeffs):
            raise TypeError("mixed exact and floating coefficients")
        else:
            coeffs = [float(c) for c in coeffs]
            exact = False
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "exact", exact)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- basic protocol -------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __repr__(self):
        tag = "exact" if self.exact else "float"
        return f"Poly({list(self.coeffs)!r}, {tag})"

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.exact == other.exact and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.exact, self.coeffs))

    def _check_mode(self, other: "Poly"):
        if self.exact != other.exact:
            raise TypeError("cannot combine exact and floating polynomials; convert explicitly")

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        self._check_mode(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return Poly([x + y for x, y in zip(a, b)])

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check_mode(other)
            out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return Poly(out)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c):
        if self.exact and not _is_exact_scalar(c):
            raise TypeError("scaling an exact polynomial by a float; convert explicitly")
        return Poly([c * a for a in self.coeffs])

    def deriv(self) -> "Poly":
        if self.degree == 0:
            return Poly([0]) if self.exact else Poly([0.0])
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def antideriv(self) -> "Poly":
        zero = Fraction(0) if self.exact else 0.0
        if self.exact:
            return Poly([zero] + [c / Fraction(i + 1) for i, c in enumerate(self.coeffs)])
        return Poly([zero] + [c / (i + 1) for i, c in enumerate(self.coeffs)])

    def integrate(self, a, b):
        """Definite integral over [a, b]; exact when self and endpoints are."""
        anti = self.antideriv()
        return anti(b) - anti(a)

    def compose_affine(self, c0, c1) -> "Poly":
        """Return p(c0 + c1*x)."""
        lin = Poly([c0, c1])
        if self.exact and not lin.exact:
            raise TypeError("affine map must be exact for an exact polynomial")
        acc = Poly([self.coeffs[-1]])
        for c in reversed(self.coeffs[:-1]):
            acc = acc * lin + Poly([c])
        return acc

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.polynomial.polynomial.polyval(x, np.asarray(self.coeffs, dtype=float))
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    # -- conversions ------------------------------------------------------

    def to_float(self) -> "Poly":
        if not self.exact:
            return self
        return Poly([float(c) for c in self.coeffs])

    def to_exact(self) -> "Poly":
        """Exact copy; floats convert via their exact binary value."""
        if self.exact:
            return self
        return Poly([Fraction(c) for c in self.coeffs])


# ---------------------------------------------------------------------------
# Gauss-Legendre quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [-1, 1]; weights sum to 2."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        vals = f(self.nodes) if callable(f) else np.asarray(f, dtype=float)
        return float(np.dot(self.weights, vals))

    def mapped(self, a: float, b: float) -> "QuadratureRule":
        """Affinely mapped rule for integrals over [a, b]."""
        half = 0.5 * (b - a)
        return QuadratureRule(a + half * (self.nodes + 1.0), half * self.weights)


def gauss_nodes(n: int) -> QuadratureRule:
    """Gauss-Legendre rule with n nodes, exact through degree 2n-1."""
    if not 1 <= int(n) <= 512:
        raise ValueError(f"node count {n} out of range [1, 512]")
    x, w = np.polynomial.legendre.leggauss(int(n))
    return QuadratureRule(x, w)


# ---------------------------------------------------------------------------
# Orthogonal families


def legendre_eval(n: int, x):
    """Legendre P_n by the three-term recurrence; accepts arrays."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(2, n + 1):
        p, p_prev = ((2 * k - 1) * x * p - (k - 1) * p_prev) / k, p
    return p if p.ndim else float(p)


def modified_legendre_eval(n: int, x):
    """Shifted-weight family Q_n by its three-term recurrence.

    Q_0 = 1/2, Q_1 = (3x-1)/4, and
    (n+1)(2n-1) Q_n = [(4n^2-1)x - 1] Q_{n-1} - (n-1)(2n+1) Q_{n-2}.
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    q_prev = np.full_like(x, 0.5)
    if n == 0:
        return q_prev if q_prev.ndim else float(q_prev)
    q = (3.0 * x - 1.0) / 4.0
    for k in range(2, n + 1):
        q, q_prev = (((4 * k * k - 1) * x - 1.0) * q - (k - 1) * (2 * k + 1) * q_prev) / (
            (k + 1) * (2 * k - 1)
        ), q
    return q if q.ndim else float(q)


@lru_cache(maxsize=None)
def legendre_poly(n: int) -> Poly:
    """Exact P_n via the recurrence."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    p_prev = Poly([1])
    if n == 0:
        return p_prev
    p = Poly([0, 1])
    for k in range(2, n + 1):
        p, p_prev = (Poly([0, 2 * k - 1]) * p - Poly([k - 1]) * p_prev).scale(
            Fraction(1, k)
        ), p
    return p


@lru_cache(maxsize=None)
def legendre_poly_rodrigues(n: int) -> Poly:
    """Exact P_n as the n-th derivative of (x^2-1)^n / (2^n n!)."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    base = Poly([-1, 0, 1])
    p = Poly([1])
    for _ in range(n):
        p = p * base
    for _ in range(n):
        p = p.deriv()
    return p.scale(Fraction(1, 2**n * math.factorial(n)))


@lru_cache(maxsize=None)
def modified_legendre_poly(n: int) -> Poly:
    """Exact Q_n as the (n+1)-th derivative of (x+1)^n (x-1)^{n+1}
    scaled by 1 / (2^{n+1} (n+1)!)."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    p = Poly([1])
    plus, minus = Poly([1, 1]), Poly([-1, 1])
    for _ in range(n):
        p = p * plus
    for _ in range(n + 1):
        p = p * minus
    for _ in range(n + 1):
        p = p.deriv()
    return p.scale(Fraction(1, 2 ** (n + 1) * math.factorial(n + 1)))


def modified_legendre_ode_residual(n: int) -> Poly:
    """d/dx[(x+1)(1-x^2) Q_n'] + n(n+2)(x+1) Q_n, identically zero."""
    q = modified_legendre_poly(n)
    lhs = (Poly([1, 1]) * Poly([1, 0, -1]) * q.deriv()).deriv()
    return lhs + Poly([n * (n + 2), n * (n + 2)]) * q


def family_norm2(family: str, n: int) -> Fraction:
    """Squared weighted L2 norm of the n-th family member on [-1, 1]."""
    if family == "legendre":
        return Fraction(2, 2 * n + 1)
    if family == "modified":
        return Fraction(1, 2 * (n + 1))
    raise ValueError(f"unknown family {family!r}")


_FAMILY_WEIGHT = {"legendre": "dx", "modified": "(x+1)dx"}


def _family_member(family: str, n: int) -> Poly:
    if family == "legendre":
        return legendre_poly(n)
    if family == "modified":
        return modified_legendre_poly(n)
    raise ValueError(f"unknown family {family!r}")


def project(poly: Poly, family: str, weight: str) -> list:
    """Expansion coefficients of ``poly`` in the family, exact integrals.

    The weight must match the family's orthogonality weight
    ('dx' for legendre, '(x+1)dx' for modified).  Coefficients come
    back exact for exact input, floats otherwise.
    """
    if family not in _FAMILY_WEIGHT:
        raise ValueError(f"unknown family {family!r}")
    if weight != _FAMILY_WEIGHT[family]:
        raise ValueError(
            f"weight {weight!r} does not match family {family!r} "
            f"(expected {_FAMILY_WEIGHT[family]!r})"
        )
    if poly.degree > MAX_PROJECT_DEGREE:
        raise ValueError(f"degree {poly.degree} exceeds projection limit {MAX_PROJECT_DEGREE}")
    was_exact = poly.exact
    p = poly.to_exact()
    w = Poly([1]) if family == "legendre" else Poly([1, 1])
    coeffs = []
    for n in range(p.degree + 1):
        num = (w * p * _family_member(family, n)).integrate(Fraction(-1), Fraction(1))
        a = num / family_norm2(family, n)
        coeffs.append(a if was_exact else float(a))
    return coeffs


def reconstruct(coeffs, family: str) -> Poly:
    """Inverse of :func:`project`: sum of coefficients times members."""
    exact = all(_is_exact_scalar(c) for c in coeffs)
    acc = Poly([0]) if exact else Poly([0.0])
    for n, c in enumerate(coeffs):
        member = _family_member(family, n)
        if not exact:
            member = member.to_float()
        acc = acc + member.scale(c)
    return acc


# ---------------------------------------------------------------------------
# Interval maxima via exact root isolation (Sturm) with float refinement


def _int_coeffs(p: Poly) -> list[int]:
    denom = math.lcm(*(c.denominator for c in p.coeffs))
    ints = [int(c * denom) for c in p.coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, abs(c))
    if g > 1:
        ints = [c // g for c in ints]
    return ints


def _int_eval(coeffs: list[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _strip_content(coeffs: list[int]) -> list[int]:
    g = 0
    for c in coeffs:
        g = math.gcd(g, abs(c))
    if g > 1:
        coeffs = [c // g for c in coeffs]
    return coeffs


def _sturm_chain(p: Poly) -> list[list[int]]:
    """Signed remainder chain with integer coefficients.

    Division is done in Fraction arithmetic per step and re-scaled to a
    content-free integer polynomial with the correct sign; degree <= 15
    keeps this cheap.
    """
    f = [Fraction(c) for c in _int_coeffs(p)]
    fp = [i * c for i, c in enumerate(f)][1:] or [Fraction(0)]
    chain = [f, fp]
    while len(chain[-1]) > 1 or (len(chain[-1]) == 1 and chain[-1][0] != 0):
        a, b = chain[-2], chain[-1]
        if len(b) == 1:
            break
        rem = list(a)
        while len(rem) >= len(b) and any(c != 0 for c in rem):
            if rem[-1] == 0:
                rem.pop()
                continue
            q = rem[-1] / b[-1]
            shift = len(rem) - len(b)
            for i, bc in enumerate(b):
                rem[shift + i] -= q * bc
            rem.pop()
        while len(rem) > 1 and rem[-1] == 0:
            rem.pop()
        if len(rem) == 1 and rem[0] == 0:
            break
        chain.append([-c for c in rem])
    # normalize each to content-free ints (positive scaling only)
    out = []
    for f in chain:
        denom = math.lcm(*(c.denominator for c in f))
        out.append(_strip_content([int(c * denom) for c in f]))
    return out


def _sign_changes(chain, x: Fraction) -> int:
    signs = []
    for coeffs in chain:
        v = _int_eval(coeffs, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def isolate_real_roots(p: Poly, a: Fraction, b: Fraction, max_depth: int = 64):
    """Disjoint brackets, each containing exactly one distinct root in (a, b]."""
    p = p.to_exact()
    if p.is_zero or p.degree == 0:
        return []
    chain = _sturm_chain(p)
    brackets = []
    stack = [(Fraction(a), Fraction(b), _sign_changes(chain, Fraction(a)),
              _sign_changes(chain, Fraction(b)), 0)]
    while stack:
        lo, hi, v_lo, v_hi, depth = stack.pop()
        count = v_lo - v_hi
        if count <= 0:
            continue
        if count == 1 or depth >= max_depth:
            brackets.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        v_mid = _sign_changes(chain, mid)
        stack.append((lo, mid, v_lo, v_mid, depth + 1))
        stack.append((mid, hi, v_mid, v_hi, depth + 1))
    return brackets


def _refine_root(p: Poly, lo: Fraction, hi: Fraction) -> float:
    """Float bisection on an isolating bracket; falls back to midpoint.

    Brackets are half-open (lo, hi], so a zero value at ``lo`` belongs
    to the neighbouring bracket and the left end is nudged inward.
    """
    pf = np.asarray([float(c) for c in p.coeffs][::-1])
    a, b = float(lo), float(hi)
    f_hi = np.polyval(pf, b)
    if f_hi == 0.0:
        return b
    f_lo = np.polyval(pf, a)
    step = (b - a) * 2.0**-24
    while f_lo == 0.0 and a + step < b:
        a += step
        f_lo = np.polyval(pf, a)
        step *= 2.0
    if f_lo == 0.0 or np.sign(f_lo) == np.sign(f_hi):
        xs = np.linspace(a, b, 65)
        vs = np.polyval(pf, xs)
        flips = np.where(np.sign(vs[:-1]) * np.sign(vs[1:]) < 0)[0]
        if flips.size == 0:
            return 0.5 * (a + b)
        a, b = xs[flips[0]], xs[flips[0] + 1]
        f_lo = vs[flips[0]]
    for _ in range(80):
        m = 0.5 * (a + b)
        fm = np.polyval(pf, m)
        if fm == 0.0:
            return m
        if np.sign(fm) == np.sign(f_lo):
            a, f_lo = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _critical_candidates(src: Poly, a: Fraction, b: Fraction) -> list[Fraction]:
    """Rational approximations of the roots of ``src`` inside [a, b].

    Exact Sturm isolation up to degree 15; beyond that, dense Chebyshev
    sampling with one Newton refinement.  Every candidate is clipped to
    the interval, so exact evaluation at a candidate never leaves it.
    """
    out: list[Fraction] = []
    if src.is_zero or src.degree == 0:
        return out
    if src.degree <= 15:
        for lo, hi in isolate_real_roots(src, a, b):
            out.append(Fraction(_refine_root(src, lo, hi)))
    else:
        k = src.degree
        af, bf = float(a), float(b)
        mid, half = 0.5 * (af + bf), 0.5 * (bf - af)
        xs = mid + half * np.cos(np.pi * np.arange(10 * k + 1) / (10 * k))
        vals = src.to_float()(xs)
        dsrc = src.deriv().to_float()
        sign_flip = np.where(np.diff(np.sign(vals)) != 0)[0]
        for i in sign_flip:
            x0 = 0.5 * (xs[i] + xs[i + 1])
            d = dsrc(x0)
            if d != 0:
                x0 = x0 - src.to_float()(x0) / d
            out.append(Fraction(float(np.clip(x0, af, bf))))
    return [min(max(c, a), b) for c in out]


def _interval_max(objective: Poly, crit_src: Poly, a: Fraction, b: Fraction) -> Fraction:
    candidates = [a, b] + _critical_candidates(crit_src, a, b)
    return max(objective(c) for c in candidates)


# ---------------------------------------------------------------------------
# Inequality checks


@dataclass(frozen=True)
class LemmaCheck:
    variant: str
    lhs: Fraction
    rhs: Fraction
    holds: bool


_VARIANTS = ("sup_odd", "deriv_odd", "sup_even", "deriv_even")


def _as_exact_poly(poly) -> Poly:
    if isinstance(poly, Poly):
        return poly.to_exact()
    return Poly(list(poly)).to_exact()


def lemma_check(poly, variant: str, L, l=None) -> LemmaCheck:
    """Check one of the four interval inequalities on [0, L].

    sup_odd     max_{[0,L]} P^2           <= (k+1)^2/L * int_0^L P^2
    deriv_odd   int_0^l (z P')^2          <= 2k(k+1) l/L * int_0^L P^2
    sup_even    max_{[0,L]} z P^2         <= 2(k+1)^2/L * int_0^L z P^2
    deriv_even  int_0^l z (z P')^2        <= 2k(k+2) l/L * int_0^L z P^2

    with k = deg P.  Derivative variants require L >= 2l > 0.  All
    integrals are exact rational; sup sides evaluate exactly at
    endpoints and at isolated critical points, so a reported ``lhs``
    is a certified value of the objective inside the interval.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    p = _as_exact_poly(poly)
    L = Fraction(L)
    if L <= 0:
        raise ValueError("L must be positive")
    if l is None:
        l = L / 2
    l = Fraction(l)
    if variant.startswith("deriv"):
        if not (l > 0 and L >= 2 * l):
            raise ValueError("derivative variants require L >= 2l > 0")
    if p.is_zero:
        return LemmaCheck(variant, Fraction(0), Fraction(0), True)
    k = p.degree
    z = Poly([0, 1])
    zero = Fraction(0)
    if variant == "sup_odd":
        lhs = _interval_max(p * p, p.deriv(), zero, L)
        rhs = Fraction((k + 1) ** 2) / L * (p * p).integrate(zero, L)
    elif variant == "deriv_odd":
        q = z * p.deriv()
        lhs = (q * q).integrate(zero, l)
        rhs = Fraction(2 * k * (k + 1)) * l / L * (p * p).integrate(zero, L)
    elif variant == "sup_even":
        lhs = _interval_max(z * p * p, p + (2 * z * p.deriv()), zero, L)
        rhs = Fraction(2 * (k + 1) ** 2) / L * (z * p * p).integrate(zero, L)
    else:  # deriv_even
        q = z * p.deriv()
        lhs = (z * q * q).integrate(zero, l)
        rhs = Fraction(2 * k * (k + 2)) * l / L * (z * p * p).integrate(zero, L)
    return LemmaCheck(variant, lhs, rhs, lhs <= rhs)


def lemma_check_unit(poly, variant: str, delta) -> LemmaCheck:
    """Same inequalities after the affine change x = 2z/L - 1 to [-1, 1].

    ``delta`` = 2l/L lies in (0, 1].  Forms:

    sup_odd     max |P|^2                      <= (k+1)^2/2 * int P^2 dx
    deriv_odd   int_{-1}^{-1+d} ((x+1)P')^2    <= k(k+1) d * int P^2 dx
    sup_even    max (x+1) P^2                  <= (k+1)^2 * int (x+1) P^2
    deriv_even  int_{-1}^{-1+d} (x+1)^3 P'^2   <= k(k+2) d * int (x+1) P^2
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    p = _as_exact_poly(poly)
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if p.is_zero:
        return LemmaCheck(variant, Fraction(0), Fraction(0), True)
    k = p.degree
    lo, hi = Fraction(-1), Fraction(1)
    cut = lo + delta
    xp1 = Poly([1, 1])
    if variant == "sup_odd":
        lhs = _interval_max(p * p, p.deriv(), lo, hi)
        rhs = Fraction((k + 1) ** 2, 2) * (p * p).integrate(lo, hi)
    elif variant == "deriv_odd":
        q = xp1 * p.deriv()
        lhs = (q * q).integrate(lo, cut)
        rhs = Fraction(k * (k + 1)) * delta * (p * p).integrate(lo, hi)
    elif variant == "sup_even":
        lhs = _interval_max(xp1 * p * p, p + 2 * (xp1 * p.deriv()), lo, hi)
        rhs = Fraction((k + 1) ** 2) * (xp1 * p * p).integrate(lo, hi)
    else:
        q = p.deriv()
        lhs = (xp1 * xp1 * xp1 * q * q).integrate(lo, cut)
        rhs = Fraction(k * (k + 2)) * delta * (xp1 * p * p).integrate(lo, hi)
    return LemmaCheck(variant, lhs, rhs, lhs <= rhs)
