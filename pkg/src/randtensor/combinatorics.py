"""Exact integer and rational primitives.

Everything here is exact: integers are Python ints and rationals are
:class:`fractions.Fraction`. No floating point is used.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import DomainError

__all__ = [
    "FactorialMode",
    "factorial_family",
    "falling",
    "rising",
    "narayana",
    "NarayanaRow",
    "narayana_row",
    "catalan",
    "bell",
    "beta_eval",
    "beta_coefficients",
    "Permutation",
    "cycle_count",
    "shifted_cycle_count",
    "integer_root",
    "exact_root",
]


class FactorialMode(enum.Enum):
    FALLING = "falling"
    RISING = "rising"


def factorial_family(n: int, t: int, mode: FactorialMode) -> int:
    """Falling ``n(n-1)...(n-t+1)`` or rising ``n(n+1)...(n+t-1)`` factorial.

    The empty product (``t == 0``) is 1. A falling factorial with ``t > n``
    contains the factor 0 and so vanishes.
    """
    if n < 0 or t < 0:
        raise DomainError(f"factorial_family needs n, t >= 0 (got n={n}, t={t})")
    step = -1 if mode is FactorialMode.FALLING else 1
    out = 1
    for i in range(t):
        out *= n + step * i
        if out == 0:
            return 0
    return out


def falling(n: int, t: int) -> int:
    """``(n)_t``; ``n`` may be negative here, which the moment recursions need."""
    if t < 0:
        raise DomainError("falling factorial needs t >= 0")
    out = 1
    for i in range(t):
        out *= n - i
    return out


def rising(n: int, t: int) -> int:
    return factorial_family(n, t, FactorialMode.RISING)


@lru_cache(maxsize=None)
def narayana(m: int, ell: int) -> int:
    """Narayana number ``N(m, ell) = C(m, ell-1) C(m, ell) / m`` with ``N(0,0) = 1``."""
    if m < 0 or ell < 0 or ell > m:
        raise DomainError(f"narayana needs 0 <= ell <= m (got m={m}, ell={ell})")
    if m == 0:
        return 1
    if ell == 0:
        return 0
    num = comb(m, ell - 1) * comb(m, ell)
    assert num % m == 0
    return num // m


def _narayana0(m: int, ell: int) -> int:
    # zero outside the triangle; used by recurrences
    if m < 0 or ell < 0 or ell > m:
        return 0
    return narayana(m, ell)


@dataclass(frozen=True)
class NarayanaRow:
    m: int
    values: tuple[int, ...]  # values[ell - 1] = N(m, ell)

    def __post_init__(self):
        if len(self.values) != self.m or any(v <= 0 for v in self.values):
            raise DomainError("NarayanaRow entries must be positive, one per ell = 1..m")
        if sum(self.values) != catalan(self.m):
            raise DomainError("NarayanaRow does not sum to the Catalan number")

    def __getitem__(self, ell: int) -> int:
        return self.values[ell - 1]


def narayana_row(m: int) -> NarayanaRow:
    if m < 1:
        raise DomainError("narayana_row needs m >= 1")
    return NarayanaRow(m, tuple(narayana(m, ell) for ell in range(1, m + 1)))


def catalan(m: int) -> int:
    return comb(2 * m, m) // (m + 1)


@lru_cache(maxsize=None)
def bell(m: int) -> int:
    """Bell number via the Bell triangle."""
    if m < 0:
        raise DomainError("bell needs m >= 0")
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def beta_coefficients(m: int) -> list[int]:
    """Coefficients ``[N(m,0), N(m,1), ..., N(m,m)]`` of the polynomial beta_m."""
    return [_narayana0(m, ell) for ell in range(m + 1)]


def beta_eval(m: int, x) -> Fraction:
    """``beta_m(x) = sum_{ell=1}^m N(m, ell) x^ell`` evaluated exactly (Horner)."""
    if m < 0:
        raise DomainError("beta_eval needs m >= 0")
    x = Fraction(x)
    acc = Fraction(0)
    for c in reversed(beta_coefficients(m)):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``{1..m}`` stored as its 1-indexed image list."""

    image: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "image", tuple(self.image))
        if sorted(self.image) != list(range(1, len(self.image) + 1)):
            raise DomainError(f"{self.image} is not a permutation of 1..{len(self.image)}")

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(tuple(range(1, m + 1)))

    @classmethod
    def from_cycles(cls, m: int, *cycles) -> "Permutation":
        """``Permutation.from_cycles(4, (1, 3), (2, 4))`` builds (1 3)(2 4) in S_4."""
        img = list(range(1, m + 1))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                img[a - 1] = b
        return cls(tuple(img))

    @property
    def m(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``: apply ``other`` first."""
        return Permutation(tuple(self(other(i)) for i in range(1, self.m + 1)))

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for start in range(1, self.m + 1):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            j = self(start)
            while j != start:
                cyc.append(j)
                seen.add(j)
                j = self(j)
            out.append(tuple(cyc))
        return out


def cycle_count(image0) -> int:
    """Number of cycles of a 0-indexed permutation given as a sequence."""
    n = len(image0)
    seen = [False] * n
    c = 0
    for i in range(n):
        if not seen[i]:
            c += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = image0[j]
    return c


def shifted_cycle_count(pi: Permutation) -> int:
    """``cyc(C_m o pi)`` where ``C_m`` sends ``i -> i+1`` and ``m -> 1``."""
    m = pi.m
    return cycle_count([pi.image[i] % m for i in range(m)])


def integer_root(n: int, k: int) -> int:
    """``floor(n ** (1/k))`` for ``n >= 0``, computed in integers."""
    if n < 0 or k < 1:
        raise DomainError("integer_root needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    x = 1 << -(-n.bit_length() // k)  # an overestimate
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def exact_root(n: int, k: int) -> int | None:
    """The integer ``q`` with ``q**k == n``, or ``None`` if ``n`` is not a k-th power."""
    q = integer_root(n, k)
    return q if q ** k == n else None
