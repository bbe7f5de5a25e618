"""Recursive and closed-form bounds on the normalized moments ``e^m = E^m / d^k``,
and the rainbow generating-function iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .combinatorics import beta_eval, integer_root
from .errors import DomainError

ROOT_BITS = 96


@dataclass(frozen=True)
class BoundSeries:
    """``entries[m] = (lower, upper)`` for ``m = 0..max_m``."""

    entries: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        if self.entries[0] != (1, 1):
            raise ValueError("entry 0 must be (1, 1)")
        for m, (lo, hi) in enumerate(self.entries):
            if lo > hi:
                raise ValueError(f"lower > upper at m={m}")

    @property
    def lower(self) -> list[Fraction]:
        return [lo for lo, _ in self.entries]

    @property
    def upper(self) -> list[Fraction]:
        return [hi for _, hi in self.entries]

    @property
    def max_m(self) -> int:
        return len(self.entries) - 1


def inv_root_upper(d: int, k: int, bits: int = ROOT_BITS) -> Fraction:
    """Rational ``r >= d**(-1/k)``, within ``2**-bits`` relative error."""
    if k == 1:
        return Fraction(1, d)
    scale = 1 << bits
    return Fraction(scale, integer_root(d * scale ** k, k))


def _convolve(seq, m: int) -> Fraction:
    # sum_{l=0}^{m-2} seq[l] * seq[m-l-1]
    return sum((seq[l] * seq[m - l - 1] for l in range(m - 1)), Fraction(0))


def sd_upper_k1(p: int, d: int, max_m: int) -> list[Fraction]:
    """Upper bounds from ``e^m <= sum_{l<=m-2} e^l e^{m-l-1} + (p + m^3)/d e^{m-1}``."""
    up = [Fraction(1)]
    for m in range(1, max_m + 1):
        up.append(_convolve(up, m) + Fraction(p + m ** 3, d) * up[m - 1])
    return up


def sd_lower_k1(p: int, d: int, max_m: int) -> list[Fraction]:
    """Lower bounds ``d/(d+m) * (sum_l e_p^l e_{p-m}^{m-l-1} + (p/d) e_{p-1}^{m-1})``.

    The letter count of the second factor is reduced by ``m``; moments are
    nondecreasing in ``p`` so the reduction can only make the bound smaller.
    """

    @lru_cache(maxsize=None)
    def lo(pp: int, m: int) -> Fraction:
        if m == 0:
            return Fraction(1)
        if pp <= 0:
            return Fraction(0)
        conv = sum((lo(pp, l) * lo(pp - m, m - l - 1) for l in range(m - 1)), Fraction(0))
        return Fraction(d, d + m) * (conv + Fraction(pp, d) * lo(pp - 1, m - 1))

    return [lo(p, m) for m in range(max_m + 1)]


def sd_bounds_k1(p: int, d: int, max_m: int) -> BoundSeries:
    if d < 2 or p < 1 or max_m < 0:
        raise DomainError("sd_bounds_k1 needs p >= 1, d >= 2, max_m >= 0")
    lo = sd_lower_k1(p, d, max_m)
    hi = sd_upper_k1(p, d, max_m)
    return BoundSeries(tuple(zip(lo, hi)))


def sd_upper_tensor(p: int, d: int, k: int, max_m: int) -> BoundSeries:
    """Upper bounds for general ``k``::

        e^m <= (1 + m^k d^{-1/k}) sum_{l<=m-2} e^l e^{m-l-1} + (p/d^k + 3 m^{k+3} d^{-1/k}) e^{m-1}

    ``d^{-1/k}`` is replaced by a rational upper bound, so the series stays a
    valid upper bound in exact arithmetic. The lower column is zero.
    """
    if d < 2 or k < 1 or p < 1 or max_m < 0:
        raise DomainError("sd_upper_tensor needs p >= 1, d >= 2, k >= 1")
    r = inv_root_upper(d, k)
    x = Fraction(p, d ** k)
    up = [Fraction(1)]
    for m in range(1, max_m + 1):
        up.append((1 + m ** k * r) * _convolve(up, m) + (x + 3 * m ** (k + 3) * r) * up[m - 1])
    return BoundSeries(((Fraction(1), Fraction(1)),) + tuple((Fraction(0), u) for u in up[1:]))


@dataclass(frozen=True)
class TheoremBounds:
    lower: Fraction  # exact; 0 when m >= sqrt(p)
    upper: float
    beta: Fraction


def trace_theorem_bounds(p: int, d: int, k: int, m: int) -> TheoremBounds:
    """``(1 - m^2/p) beta_m(x) <= e^m <= exp(3 m^{k+4} / (x d^{1/k})) beta_m(x)``."""
    if p < 1 or d < 2 or k < 1 or m < 1:
        raise DomainError("trace_theorem_bounds needs p, m >= 1, d >= 2, k >= 1")
    x = Fraction(p, d ** k)
    beta = beta_eval(m, x)
    lower = (1 - Fraction(m * m, p)) * beta if m * m < p else Fraction(0)
    expo = 3 * m ** (k + 4) / (float(x) * d ** (1.0 / k))
    try:
        upper = math.exp(expo) * float(beta)
    except OverflowError:
        upper = math.inf
    return TheoremBounds(lower, upper, beta)


# ---------------------------------------------------------------------------
# rainbow generating function


@dataclass(frozen=True)
class GFState:
    x: float
    z: float
    a: int
    g_s: float
    g_d: float

    @property
    def z0(self) -> float:
        return critical_z(self.x)


def critical_z(x: float) -> float:
    return (1 + math.sqrt(x)) ** 2


def rainbow_closed_form(x: float, z: float) -> float:
    """Physical (smaller) fixed point ``G_s`` of the rainbow recursion."""
    y = 1.0 / z
    b = y * (1 - x) + 1
    disc = b * b - 4 * y
    if disc < 0:
        if disc > -1e-12:
            disc = 0.0
        else:
            raise DomainError(f"z={z} is below the critical point {critical_z(x)}")
    return (b - math.sqrt(disc)) / (2 * y)


def narayana_gf(x: float, y: float) -> float:
    """Closed form of ``F(x, y) = sum_{l <= m} N(m, l) x^l y^m``."""
    if y == 0:
        return 1.0
    disc = 1 - 2 * (1 + x) * y + (1 - x) ** 2 * y * y
    return (1 + (1 - x) * y - math.sqrt(max(disc, 0.0))) / (2 * y)


def rainbow_iterates(x: float, z: float, iters: int):
    """Yield ``GFState`` for ``a = 0..iters``."""
    if x <= 0:
        raise DomainError("x must be positive")
    z0 = critical_z(x)
    if z < z0 * (1 - 1e-14):
        raise DomainError(f"z={z} < z0={z0}; the iteration may diverge")
    gs = gd = 1.0
    yield GFState(x, z, 0, gs, gd)
    for a in range(1, iters + 1):
        prod = gs * gd / z
        gs, gd = 1 + x * prod, 1 + prod
        yield GFState(x, z, a, gs, gd)


def rainbow_gf(x: float, z: float, iters: int) -> tuple[GFState, float]:
    state = None
    for state in rainbow_iterates(x, z, iters):
        pass
    return state, rainbow_closed_form(x, z)
