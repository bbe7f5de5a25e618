"""Canonical (restricted-growth) words encoding set partitions of trace positions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import DomainError, ResourceGuardError

DEFAULT_CAP = 8


def canonicalize(word: Sequence) -> tuple[int, ...]:
    """Relabel letters by order of first occurrence: ``(3, 3, 1, 3) -> (1, 1, 2, 1)``."""
    labels: dict = {}
    out = []
    for a in word:
        if a not in labels:
            labels[a] = len(labels) + 1
        out.append(labels[a])
    return tuple(out)


def parse_word(text: str) -> tuple[int, ...]:
    """``"1212"`` or ``"1,2,10,2"`` -> tuple of ints."""
    text = text.strip()
    if "," in text:
        return tuple(int(t) for t in text.split(","))
    return tuple(int(ch) for ch in text)


@dataclass(frozen=True)
class SetPartitionString:
    """A restricted-growth word: ``word[0] == 1`` and each letter is at most one
    more than the largest letter before it."""

    word: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(a) for a in self.word)
        object.__setattr__(self, "word", w)
        top = 0
        for a in w:
            if a < 1 or a > top + 1:
                raise DomainError(f"{w} is not a restricted-growth word")
            top = max(top, a)

    @classmethod
    def from_word(cls, word: Sequence) -> "SetPartitionString":
        return cls(canonicalize(word))

    @classmethod
    def parse(cls, text: str) -> "SetPartitionString":
        return cls.from_word(parse_word(text))

    @property
    def m(self) -> int:
        return len(self.word)

    @property
    def ell(self) -> int:
        return max(self.word, default=0)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        mu = [0] * self.ell
        for a in self.word:
            mu[a - 1] += 1
        return tuple(mu)

    def blocks(self) -> list[tuple[int, ...]]:
        """0-indexed positions of each letter, in letter order."""
        out: list[list[int]] = [[] for _ in range(self.ell)]
        for i, a in enumerate(self.word):
            out[a - 1].append(i)
        return [tuple(b) for b in out]

    def __str__(self) -> str:
        if self.ell < 10:
            return "".join(map(str, self.word))
        return ",".join(map(str, self.word))

    def __len__(self) -> int:
        return self.m


def enumerate_partitions(m: int, cap: int = DEFAULT_CAP) -> Iterator[SetPartitionString]:
    """All restricted-growth words of length ``m`` in lexicographic order (Bell(m) of them)."""
    if m < 1:
        raise DomainError("enumerate_partitions needs m >= 1")
    if m > cap:
        raise ResourceGuardError(f"m={m} exceeds the enumeration cap {cap}; raise the cap explicitly")
    yield from (SetPartitionString(w) for w in _rgs(m))


def _rgs(m: int) -> Iterator[tuple[int, ...]]:
    word = [1] * m
    prefix_max = [1] * m
    while True:
        yield tuple(word)
        # rightmost position that can still be incremented
        i = m - 1
        while i > 0 and word[i] > prefix_max[i - 1]:
            i -= 1
        if i == 0:
            return
        word[i] += 1
        prefix_max[i] = max(prefix_max[i - 1], word[i])
        for j in range(i + 1, m):
            word[j] = 1
            prefix_max[j] = prefix_max[i]
