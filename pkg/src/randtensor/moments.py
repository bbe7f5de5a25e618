"""Exact moments ``E^m = E[tr M^m]`` of sums of random product states.

The sum over letter strings ``s in [p]^m`` is grouped by the set partition of
positions the string induces. Each canonical word contributes
``(p)_ell * w(word)^k`` where ``w`` is the single-factor trace expectation,
computed from the cycle structure of ``C_m o pi`` over the stabilizer of the
word (a direct product of symmetric groups on its blocks).
"""

from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .combinatorics import cycle_count, exact_root, falling, rising
from .errors import DomainError, ResourceGuardError
from .reduction import ReductionClass, classify
from .words import DEFAULT_CAP, SetPartitionString, canonicalize, enumerate_partitions

REPEATED_GUARD = 10 ** 7


class MomentKind(enum.Enum):
    NORMALIZED = "normalized"
    GAUSSIAN = "gaussian"
    PARTIAL_TRACE = "partial_trace"
    REPEATED = "repeated"


@dataclass(frozen=True)
class MomentQuery:
    p: int
    d: int
    k: int
    m: int
    kind: MomentKind = MomentKind.NORMALIZED
    d_a: int | None = None
    d_b: int | None = None

    def __post_init__(self):
        if self.p < 1 or self.k < 1 or self.m < 1:
            raise DomainError("p, k, m must be positive")
        if self.kind is MomentKind.PARTIAL_TRACE:
            if self.d_a is None or self.d_b is None or self.d_a < 2 or self.d_b < 2:
                raise DomainError("partial-trace queries need d_a, d_b >= 2")
        elif self.d < 2:
            raise DomainError("d must be >= 2")
        if self.kind is MomentKind.REPEATED and exact_root(self.p, self.k) is None:
            raise DomainError(f"p={self.p} is not a perfect {self.k}-th power")

    @property
    def dim(self) -> int:
        """Local dimension of one tensor factor of M."""
        return self.d_a if self.kind is MomentKind.PARTIAL_TRACE else self.d

    @property
    def x(self) -> Fraction:
        return Fraction(self.p, self.dim ** self.k)


@dataclass(frozen=True)
class MomentResult:
    total_E: Fraction
    normalized_e: Fraction
    by_block_count: dict[int, Fraction] = field(default_factory=dict)
    by_class: dict[ReductionClass, Fraction] = field(default_factory=dict)


@lru_cache(maxsize=None)
def cycle_histogram(word: tuple[int, ...]) -> dict[tuple[int, int], int]:
    """Counts of ``(cyc(C_m o pi), cyc(pi))`` over the stabilizer of ``word``.

    ``C_m`` maps position ``i`` to ``i + 1`` cyclically. The result is a
    polynomial description of every single-string moment, so it is cached by
    word and reused for any ``d``.
    """
    sigma = SetPartitionString(word)
    m = sigma.m
    blocks = sigma.blocks()
    hist: Counter = Counter()
    image = [0] * m
    for perms in itertools.product(*(itertools.permutations(b) for b in blocks)):
        for blk, img in zip(blocks, perms):
            for src, dst in zip(blk, img):
                image[src] = dst
        shifted = [(j + 1) % m for j in image]
        hist[(cycle_count(shifted), cycle_count(image))] += 1
    return dict(hist)


def _as_word(sigma) -> tuple[int, ...]:
    if isinstance(sigma, SetPartitionString):
        return sigma.word
    return canonicalize(sigma)


def string_moment(sigma, d: int, kind: MomentKind = MomentKind.NORMALIZED) -> Fraction:
    """``E_d[sigma]`` (Haar unit vectors) or its Gaussian counterpart."""
    if d < 2:
        raise DomainError("string_moment needs d >= 2")
    word = _as_word(sigma)
    m = len(word)
    hist = cycle_histogram(word)
    num = sum(n * d ** c for (c, _), n in hist.items())
    if kind is MomentKind.NORMALIZED:
        den = 1
        for mu in Counter(word).values():
            den *= rising(d, mu)
        return Fraction(num, den)
    if kind is MomentKind.GAUSSIAN:
        return Fraction(num, d ** m)
    raise DomainError(f"string_moment does not handle {kind}")


def string_moment_ptrace(sigma, d_a: int, d_b: int) -> Fraction:
    """Single-string moment of reduced states ``tr_B`` of Haar vectors on ``A (x) B``."""
    if d_a < 2 or d_b < 2:
        raise DomainError("string_moment_ptrace needs d_a, d_b >= 2")
    word = _as_word(sigma)
    hist = cycle_histogram(word)
    num = sum(n * d_a ** ca * d_b ** cb for (ca, cb), n in hist.items())
    den = 1
    for mu in Counter(word).values():
        den *= rising(d_a * d_b, mu)
    return Fraction(num, den)


def _weight(sigma: SetPartitionString, q: MomentQuery) -> Fraction:
    if q.kind is MomentKind.PARTIAL_TRACE:
        return string_moment_ptrace(sigma, q.d_a, q.d_b)
    return string_moment(sigma, q.d, q.kind)


@lru_cache(maxsize=None)
def _classes(m: int, cap: int) -> tuple[tuple[SetPartitionString, ReductionClass], ...]:
    return tuple((s, classify(s.word)) for s in enumerate_partitions(m, cap))


def ensemble_moment(q: MomentQuery, cap: int = DEFAULT_CAP) -> MomentResult:
    """Exact ``E^m`` for the normalized, Gaussian or partial-trace ensemble."""
    if q.kind is MomentKind.REPEATED:
        raise DomainError("use repeated_moment for the repeated ensemble")
    if q.m > cap:
        raise ResourceGuardError(f"m={q.m} exceeds the enumeration cap {cap}")
    by_ell: dict[int, Fraction] = {}
    by_cls = {c: Fraction(0) for c in ReductionClass}
    for sigma, cls in _classes(q.m, cap):
        pf = falling(q.p, sigma.ell)
        if pf == 0:
            continue
        term = pf * _weight(sigma, q) ** q.k
        by_ell[sigma.ell] = by_ell.get(sigma.ell, Fraction(0)) + term
        by_cls[cls] += term
    total = sum(by_ell.values(), Fraction(0))
    return MomentResult(total, total / q.dim ** q.k, by_ell, by_cls)


def moment_coefficient_table(m: int, k: int, d: int, cap: int = DEFAULT_CAP) -> dict[int, Fraction]:
    """``c_ell`` with ``E^m = sum_ell c_ell (p)_ell`` at fixed ``d`` and ``k``."""
    if d < 2:
        raise DomainError("d must be >= 2")
    table: dict[int, Fraction] = {}
    for sigma in enumerate_partitions(m, cap):
        table[sigma.ell] = table.get(sigma.ell, Fraction(0)) + string_moment(sigma, d) ** k
    return table


def class_sum(q: MomentQuery, cls: ReductionClass, cap: int = DEFAULT_CAP) -> Fraction:
    """Contribution of one reduction class to ``E^m``."""
    if q.m > cap:
        raise ResourceGuardError(f"m={q.m} exceeds the enumeration cap {cap}")
    total = Fraction(0)
    for sigma, c in _classes(q.m, cap):
        if c is cls:
            total += falling(q.p, sigma.ell) * _weight(sigma, q) ** q.k
    return total


def letter_maps(p: int, k: int) -> list[tuple[int, ...]]:
    """``maps[j-1][s-1] = ceil(s / p^(1 - j/k))`` for ``j = 1..k``."""
    q = exact_root(p, k)
    if q is None:
        raise DomainError(f"p={p} is not a perfect {k}-th power")
    maps = []
    for j in range(1, k + 1):
        div = q ** (k - j)
        maps.append(tuple(-(-s // div) for s in range(1, p + 1)))
    return maps


def repeated_moment(q: MomentQuery, guard: int = REPEATED_GUARD) -> Fraction:
    """Exact ``E^m`` of the ensemble whose j-th tensor factor of state ``s`` is
    shared among all ``s`` with the same ``ceil(s / p^(1-j/k))``."""
    if q.kind is not MomentKind.REPEATED:
        raise DomainError("repeated_moment needs a REPEATED query")
    if q.p ** q.m > guard:
        raise ResourceGuardError(f"p^m = {q.p ** q.m} exceeds the guard {guard}")
    maps = letter_maps(q.p, q.k)

    @lru_cache(maxsize=None)
    def w(word: tuple[int, ...]) -> Fraction:
        return string_moment(word, q.d)

    total = Fraction(0)
    for s in itertools.product(range(q.p), repeat=q.m):
        term = Fraction(1)
        for mp in maps:
            term *= w(canonicalize([mp[i] for i in s]))
        total += term
    return total


def moment(q: MomentQuery, cap: int = DEFAULT_CAP) -> Fraction:
    """``E^m`` for any query kind."""
    if q.kind is MomentKind.REPEATED:
        return repeated_moment(q)
    return ensemble_moment(q, cap).total_E


def tabulated_moment(p: int, d: int, k: int, m: int) -> Fraction:
    """Closed forms for ``E^1 .. E^6`` as polynomials in ``(p)_t``, ``1/d^k`` and ``1/(d+j)^k``.

    Kept independent of the enumeration path so the two can be compared.
    """
    F = Fraction
    P = lambda t: falling(p, t)  # noqa: E731
    dk = d ** k
    r1 = F(1, (d + 1) ** k)
    if m == 1:
        return F(p)
    if m == 2:
        return p + F(P(2), dk)
    if m == 3:
        return p + 3 * F(P(2), dk) + F(P(3), dk ** 2)
    if m == 4:
        return (p + 6 * F(P(2), dk) + 6 * F(P(3), dk ** 2) + F(P(4), dk ** 3)
                + 2 ** k * F(P(2), dk) * r1)
    if m == 5:
        return (p + 10 * F(P(2), dk) + 20 * F(P(3), dk ** 2) + 10 * F(P(4), dk ** 3)
                + F(P(5), dk ** 4) + 5 * 2 ** k * F(P(2), dk) * r1)
    if m == 6:
        return (p + 15 * F(P(2), dk) + 50 * F(P(3), dk ** 2) + 50 * F(P(4), dk ** 3)
                + 15 * F(P(5), dk ** 4) + F(P(6), dk ** 5)
                + 15 * 2 ** k * F(P(2), dk) * r1
                + F(P(2) * (d + 3) ** k, dk ** 2 * (d + 1) ** (2 * k))
                + 6 ** k * F(P(3), dk) * r1 * F(1, (d + 2) ** k))
    raise DomainError("closed forms are tabulated for m = 1..6 only")


def iter_queries(ps: Iterable[int], ds: Iterable[int], ks: Iterable[int], ms: Iterable[int]):
    for p, d, k, m in itertools.product(ps, ds, ks, ms):
        yield MomentQuery(p, d, k, m)
