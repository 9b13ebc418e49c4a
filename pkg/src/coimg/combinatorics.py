"""Exact counting, ranking/unranking and sampling over combination spaces.

Composites are never enumerated: a class with C(1231, 3) = 310,144,295
possible member triples is handled by mapping integer ranks to tuples on
demand.  Tuples are ordered lexicographically: strictly increasing index
tuples when repetition is disallowed, non-decreasing tuples when allowed.
All counts are exact integers and must fit in an unsigned 128-bit value;
anything larger raises :class:`~coimg.errors.Overflow` instead of silently
degrading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from coimg.errors import CountExceedsSpace, MalformedTuple, Overflow, RankOutOfRange
from coimg.rng import SplitMix64

U128_MAX = (1 << 128) - 1

# Above this many bits a Stirling estimate is decisive and the exact big-int
# product is skipped.
_SCREEN_BITS = 160.0


def _checked(value: int) -> int:
    if value > U128_MAX:
        raise Overflow(f"count {value} exceeds 128-bit unsigned range")
    return value


def _log2_binomial(n: int, k: int) -> float:
    lg = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return lg / math.log(2.0)


def binomial(n: int, k: int) -> int:
    """C(n, k) as an exact integer; k > n yields 0.

    Raises :class:`Overflow` when the result would not fit in 128 bits.
    """
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be non-negative")
    if k > n:
        return 0
    if k > 1 and _log2_binomial(n, k) > _SCREEN_BITS:
        raise Overflow(f"C({n}, {k}) exceeds 128-bit unsigned range")
    return _checked(math.comb(n, k))


def multiset_binomial(n: int, k: int) -> int:
    """Number of size-k multisets over n symbols: C(n + k - 1, k)."""
    if n < 1:
        raise ValueError("multiset population must be at least 1")
    if k < 0:
        raise ValueError("multiset size must be non-negative")
    return binomial(n + k - 1, k)


@dataclass(frozen=True)
class CombinationSpace:
    """The set of k-element selections from a population of n, with exact size."""

    n: int
    k: int
    with_repetition: bool = False

    def __post_init__(self) -> None:
        if self.n < 0 or self.k < 0:
            raise ValueError("population and selection sizes must be non-negative")
        object.__setattr__(self, "_size", self._compute_size())

    def _compute_size(self) -> int:
        if self.with_repetition:
            if self.n == 0:
                return 1 if self.k == 0 else 0
            return multiset_binomial(self.n, self.k)
        return binomial(self.n, self.k)

    @property
    def size(self) -> int:
        return self._size  # type: ignore[attr-defined]


def unrank_combination(space: CombinationSpace, rank: int) -> tuple[int, ...]:
    """Return the rank-th tuple of ``space`` in lexicographic order.

    Inverse of :func:`rank_combination`; bijective over [0, space.size).
    """
    if rank < 0 or rank >= space.size:
        raise RankOutOfRange(f"rank {rank} outside [0, {space.size})")
    n, k = space.n, space.k
    out: list[int] = []
    remaining = rank
    low = 0
    for i in range(k):
        rem = k - i - 1
        v = low
        # Number of tuples whose element at this position equals v; updated
        # incrementally with exact integer division as v advances.
        if space.with_repetition:
            count = math.comb(n - v + rem - 1, rem)
        else:
            count = math.comb(n - v - 1, rem)
        while remaining >= count:
            remaining -= count
            m = (n - v + rem - 1) if space.with_repetition else (n - v - 1)
            count = count * (m - rem) // m
            v += 1
        out.append(v)
        low = v if space.with_repetition else v + 1
    return tuple(out)


def rank_combination(space: CombinationSpace, tup: tuple[int, ...]) -> int:
    """Lexicographic rank of ``tup`` within ``space``."""
    _validate_tuple(space, tup)
    n, k = space.n, space.k
    rank = 0
    low = 0
    for i, v in enumerate(tup):
        rem = k - i - 1
        # Hockey-stick closed form for the number of tuples skipped while the
        # element at position i ran from `low` up to v - 1.
        if space.with_repetition:
            rank += math.comb(n - low + rem, rem + 1) - math.comb(n - v + rem, rem + 1)
            low = v
        else:
            rank += math.comb(n - low, rem + 1) - math.comb(n - v, rem + 1)
            low = v + 1
    return rank


def _validate_tuple(space: CombinationSpace, tup: tuple[int, ...]) -> None:
    if len(tup) != space.k:
        raise MalformedTuple(f"expected {space.k} elements, got {len(tup)}")
    prev = -1
    for v in tup:
        if v < 0 or v >= space.n:
            raise MalformedTuple(f"index {v} outside population [0, {space.n})")
        if space.with_repetition:
            if v < prev:
                raise MalformedTuple("tuple must be non-decreasing")
        elif v <= prev:
            raise MalformedTuple("tuple must be strictly increasing")
        prev = v


def sample_distinct_ranks(space_size: int, count: int, seed: int) -> list[int]:
    """Sample ``count`` distinct ranks from [0, space_size), sorted ascending.

    Uniform over subsets and deterministic in ``seed``.  Rejection against a
    set of already-chosen ranks; when more than half the space is requested
    the complement is sampled instead, so expected rejections stay negligible.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count > space_size:
        raise CountExceedsSpace(f"cannot draw {count} distinct ranks from {space_size}")
    if count == space_size:
        return list(range(space_size))
    rng = SplitMix64(seed)
    if count > space_size // 2:
        excluded = _draw_distinct(rng, space_size, space_size - count)
        return [r for r in range(space_size) if r not in excluded]
    return sorted(_draw_distinct(rng, space_size, count))


def _draw_distinct(rng: SplitMix64, space_size: int, count: int) -> set[int]:
    chosen: set[int] = set()
    while len(chosen) < count:
        chosen.add(rng.next_below(space_size))
    return chosen
