"""Shared vocabulary for broadcast cache networks.

A delivery round involves a server holding N files of F symbols each, K
caches that each store an m_ratio fraction of the library, and multicast
messages addressed to subsets of caches.  This module holds the small
pieces everything else builds on: system and demand descriptions, cache
subsets as bitmasks, exact binomial coefficients, and the integer
partitions that classify how K requests split over the distinct files
(the redundancy pattern of a demand vector).

Conventions used throughout the package:

* cache indices and file indices are 1-based,
* a subset of caches is canonically a bitmask where bit ``i - 1`` stands
  for cache ``i``, and subsets are ordered by ascending mask value,
* redundancy patterns are non-increasing tuples of positive counts.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass


@dataclass(frozen=True)
class SystemConfig:
    """Static description of one cache network.

    K caches, a library of N files, per-cache capacity m_ratio * N files.
    F is the file length in symbols and only matters for bit-level
    delivery; analytic rate work leaves it None.
    """

    K: int
    N: int
    m_ratio: float
    F: int | None = None

    def __post_init__(self):
        if not isinstance(self.K, int) or self.K < 1:
            raise ValueError("K must be a positive integer")
        if not isinstance(self.N, int) or self.N < self.K:
            raise ValueError("N must be an integer >= K (nonredundant library)")
        if not 0.0 <= self.m_ratio <= 1.0:
            raise ValueError("m_ratio must lie in [0, 1]")
        if self.F is not None and (not isinstance(self.F, int) or self.F < 1):
            raise ValueError("F must be a positive integer when given")


@dataclass(frozen=True)
class DemandVector:
    """One request per cache; entry i is the file index cache i wants."""

    requests: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(int(r) for r in self.requests))
        if len(self.requests) < 1:
            raise ValueError("demand vector needs at least one request")
        if any(r < 1 for r in self.requests):
            raise ValueError("file indices are 1-based and positive")

    @property
    def K(self) -> int:
        return len(self.requests)

    def distinct(self) -> frozenset[int]:
        return frozenset(self.requests)


@dataclass(frozen=True)
class RedundancyPattern:
    """How K requests split over distinct files: non-increasing counts."""

    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.counts) < 1:
            raise ValueError("pattern needs at least one part")
        if any(c < 1 for c in self.counts):
            raise ValueError("pattern counts must be positive")
        if any(a < b for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("pattern counts must be non-increasing")

    @property
    def K(self) -> int:
        return sum(self.counts)

    @property
    def L(self) -> int:
        return len(self.counts)

    def is_symmetric(self) -> bool:
        """True when every distinct file is requested equally often."""
        return self.counts[0] == self.counts[-1]

    def __str__(self) -> str:
        return "-".join(str(c) for c in self.counts)


@dataclass(frozen=True, order=True)
class CacheSubset:
    """A subset of caches stored as a bitmask (bit i-1 <-> cache i)."""

    mask: int

    def __post_init__(self):
        if self.mask < 0:
            raise ValueError("mask must be non-negative")

    @classmethod
    def from_members(cls, members) -> "CacheSubset":
        mask = 0
        for k in members:
            if k < 1:
                raise ValueError("cache indices are 1-based and positive")
            mask |= 1 << (k - 1)
        return cls(mask)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    @property
    def members(self) -> tuple[int, ...]:
        out, m, k = [], self.mask, 1
        while m:
            if m & 1:
                out.append(k)
            m >>= 1
            k += 1
        return tuple(out)

    def contains(self, cache: int) -> bool:
        return bool(self.mask >> (cache - 1) & 1)

    def without(self, cache: int) -> "CacheSubset":
        return CacheSubset(self.mask & ~(1 << (cache - 1)))

    def __iter__(self):
        return iter(self.members)

    def __str__(self) -> str:
        return "{" + ",".join(str(k) for k in self.members) + "}"


def binomial(n: int, k: int) -> int:
    """Exact C(n, k); 0 when k > n.  Arbitrary-precision integers."""
    if n < 0 or k < 0:
        raise ValueError("binomial needs n, k >= 0")
    return math.comb(n, k)


def redundancy_pattern(d: DemandVector):
    """Classify a demand vector.

    Returns (pattern, L, D): the non-increasing multiplicity pattern, the
    number of distinct requested files, and the set of distinct files.
    """
    counts = Counter(d.requests)
    pattern = RedundancyPattern(tuple(sorted(counts.values(), reverse=True)))
    return pattern, len(counts), frozenset(counts)


def subsets_of_size(K: int, s: int) -> list[CacheSubset]:
    """All size-s subsets of {1..K} in ascending bitmask order."""
    if K < 0 or s < 0:
        raise ValueError("subsets_of_size needs K, s >= 0")
    if s > K:
        return []
    return [CacheSubset(m) for m in range(1 << K) if m.bit_count() == s]


def partitions_into_parts(K: int, L: int) -> list[RedundancyPattern]:
    """Integer partitions of K into exactly L positive parts.

    Deterministic order: descending lexicographic on the count tuples,
    e.g. (9, 3) -> (7,1,1), (6,2,1), (5,3,1), (5,2,2), (4,4,1), (4,3,2),
    (3,3,3).
    """
    if K < 1 or L < 1:
        raise ValueError("partitions_into_parts needs K, L >= 1")
    if L > K:
        return []

    out: list[RedundancyPattern] = []

    def rec(remaining, parts_left, max_part, prefix):
        if parts_left == 1:
            if remaining <= max_part:
                out.append(RedundancyPattern(prefix + (remaining,)))
            return
        # each remaining part is >= 1, so the next one is bounded below
        lo = -(-remaining // parts_left)  # ceil: keep non-increasing feasible
        for first in range(min(max_part, remaining - (parts_left - 1)), lo - 1, -1):
            rec(remaining - first, parts_left - 1, first, prefix + (first,))

    rec(K, L, K, ())
    return out
