"""Deterministic 64-bit mixing and random streams.

Every random decision in the pipeline flows through the primitives here, so
generated datasets are reproducible bit-for-bit across platforms, Python
versions, and worker counts.  The constants are public and fixed:

* ``mix64`` is one output step of SplitMix64 (Steele et al.) from a given
  state: ``state += 0x9E3779B97F4A7C15`` followed by the
  ``0xBF58476D1CE4E5B9`` / ``0x94D049BB133111EB`` xor-shift-multiply
  finalizer.
* String hashing is 64-bit FNV-1a over UTF-8 bytes
  (offset ``0xCBF29CE484222325``, prime ``0x100000001B3``).

Derived seeds never depend on Python's hash randomization or on the stdlib
``random`` module.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(x: int) -> int:
    """One SplitMix64 advance-and-output step from state ``x``."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash of ``text`` encoded as UTF-8."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def class_seed(global_seed: int, class_name: str) -> int:
    """Per-class seed: ``mix64(global_seed XOR fnv1a64(class_name))``.

    Deriving from the class name (not its position) means adding or removing
    an unrelated class never perturbs another class's random stream.
    """
    return mix64((global_seed & MASK64) ^ fnv1a64(class_name))


def record_seed(global_seed: int, class_name: str, rank: int, epoch: int) -> int:
    """Seed for one record's transform stream, stable in (class, rank, epoch).

    Ranks may exceed 64 bits, so the low and high words are folded in
    separately.
    """
    s = class_seed(global_seed, class_name)
    s = mix64(s ^ (rank & MASK64))
    s = mix64(s ^ ((rank >> 64) & MASK64))
    return mix64(s ^ (epoch & MASK64))


class SplitMix64:
    """Tiny deterministic RNG over the documented SplitMix64 sequence."""

    def __init__(self, seed: int) -> None:
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / (1 << 53)

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound); bound may exceed 64 bits.

        Draws the minimal number of 64-bit words, masks to the bound's bit
        length and rejects overshoot, so the result is exactly uniform.
        """
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound == 1:
            return 0
        bits = (bound - 1).bit_length()
        words = (bits + 63) // 64
        while True:
            value = 0
            for _ in range(words):
                value = (value << 64) | self.next_u64()
            value >>= words * 64 - bits
            if value < bound:
                return value

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.next_float()

    def next_int_range(self, low: int, high: int) -> int:
        """Uniform integer in the inclusive range [low, high]."""
        return low + self.next_below(high - low + 1)
