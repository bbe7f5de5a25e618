"""String simplification: cyclic repeat removal, unique-letter removal,
reduction classes and the (a, b) bijection for completely reducible words."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError
from .words import SetPartitionString, canonicalize


class ReductionClass(enum.Enum):
    COMPLETELY_REDUCIBLE = "completely_reducible"
    IRREDUCIBLE = "irreducible"
    MIXED = "mixed"


@dataclass(frozen=True)
class ReductionResult:
    reduced: SetPartitionString | None  # None is the empty word
    removed_unique: int
    cls: ReductionClass

    @property
    def is_empty(self) -> bool:
        return self.reduced is None


def remove_repeats(word: Sequence) -> tuple:
    """Collapse runs of equal letters, treating the word as a cycle."""
    w = tuple(word)
    if len(w) <= 1:
        return w
    if len(set(w)) == 1:
        return w[:1]
    return tuple(a for i, a in enumerate(w) if a != w[i - 1])


def remove_unique(word: Sequence) -> tuple[tuple, int]:
    """Drop letters that occur exactly once; returns the new word and how many were dropped."""
    counts = Counter(word)
    kept = tuple(a for a in word if counts[a] > 1)
    return kept, len(word) - len(kept)


def reduce(word: Sequence) -> ReductionResult:
    """Apply both rules until neither changes the word."""
    w = tuple(word)
    if not w:
        raise DomainError("reduce needs a nonempty word")
    u = 0
    while True:
        w2 = remove_repeats(w)
        w2, removed = remove_unique(w2)
        u += removed
        if w2 == w:
            break
        w = w2
    if not w:
        return ReductionResult(None, u, ReductionClass.COMPLETELY_REDUCIBLE)
    cls = ReductionClass.IRREDUCIBLE if len(w) == len(word) else ReductionClass.MIXED
    return ReductionResult(SetPartitionString(canonicalize(w)), u, cls)


def classify(word: Sequence) -> ReductionClass:
    return reduce(word).cls


@dataclass(frozen=True)
class ABPair:
    """First-occurrence positions ``a`` and cumulative multiplicities ``b`` (both 1-indexed)."""

    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))

    @property
    def ell(self) -> int:
        return len(self.a)

    def validate(self, m: int) -> None:
        a, b = self.a, self.b
        if not a or len(a) != len(b):
            raise DomainError("a and b must be nonempty and of equal length")
        if a[0] != 1 or any(x >= y for x, y in zip(a, a[1:])) or a[-1] > m:
            raise DomainError(f"a={a} violates 1 = a_1 < ... < a_l <= m")
        if b[0] < 1 or any(x >= y for x, y in zip(b, b[1:])) or b[-1] != m:
            raise DomainError(f"b={b} violates 1 <= b_1 < ... < b_l = m")
        if any(x > y for x, y in zip(a, b)):
            raise DomainError(f"a={a}, b={b} violates a_i <= b_i")


def narayana_decode(ab: ABPair, m: int) -> SetPartitionString:
    """Rebuild the completely reducible word with first occurrences ``a`` and
    cumulative counts ``b``: keep placing the current letter until the next
    first occurrence or until it runs out, then fall back to the most recent
    letter that still has copies left."""
    ab.validate(m)
    mu = [0] + [hi - lo for lo, hi in zip((0,) + ab.b[:-1], ab.b)]
    starts = {t: i for i, t in enumerate(ab.a, start=1)}
    sigma = []
    s = 0
    for t in range(1, m + 1):
        if t in starts:
            s = starts[t]
        if s < 1:
            raise DomainError(f"{ab} leaves position {t} without an available letter")
        sigma.append(s)
        mu[s] -= 1
        while s > 0 and mu[s] == 0:
            s -= 1
    out = SetPartitionString(tuple(sigma))
    if narayana_encode(out) != ab:
        raise DomainError(f"{ab} does not describe a completely reducible word")
    return out


def narayana_encode(sigma: SetPartitionString) -> ABPair:
    if reduce(sigma.word).cls is not ReductionClass.COMPLETELY_REDUCIBLE:
        raise DomainError(f"{sigma} is not completely reducible")
    a = tuple(blk[0] + 1 for blk in sigma.blocks())
    b = []
    total = 0
    for mu in sigma.multiplicities:
        total += mu
        b.append(total)
    return ABPair(a, tuple(b))


def iter_ab_pairs(m: int, ell: int):
    """Every ABPair of length ``ell`` satisfying the constraints for words of length ``m``."""
    from itertools import combinations

    for a_tail in combinations(range(2, m + 1), ell - 1):
        a = (1,) + a_tail
        for b_head in combinations(range(1, m), ell - 1):
            b = b_head + (m,)
            if all(x <= y for x, y in zip(a, b)):
                yield ABPair(a, b)
