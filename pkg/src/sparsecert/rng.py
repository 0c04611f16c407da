"""Portable seeded random numbers.

The generators here are fully specified so that any implementation, in any
language, reproduces the same stream from the same seed:

* ``splitmix64`` (Steele, Lea, Flood) scrambles seeds and derives sub-seeds.
* ``Xorshift64Star`` (Marsaglia xorshift with Vigna's multiplicative output
  scrambler, shifts 12/25/27, multiplier 0x2545F4914F6CDD1D) is the stream.
  Its initial state is ``splitmix64(seed)``, replaced by ``0x9E3779B97F4A7C15``
  in the (measure-zero) event that it is 0.
* Uniform doubles take the top 53 bits: ``(next() >> 11) * 2**-53`` in [0, 1).
* Standard normals use the Box-Muller transform on a pair of uniforms
  ``u1 = 1 - uniform()`` (so u1 is in (0, 1]) and ``u2 = uniform()``, giving
  ``sqrt(-2 ln u1) * cos(2 pi u2)`` then ``sqrt(-2 ln u1) * sin(2 pi u2)``.
  Normals are consumed in that order; an odd leftover is kept for the next call.

Python's ``random`` / numpy generators are deliberately not used here: their
streams are implementation details we cannot pin across languages.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_XORSHIFT_MULT = 0x2545F4914F6CDD1D
_TWO_POW_M53 = 2.0 ** -53


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x`` (the state is advanced first)."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Mix integer keys into a seed, one splitmix64 step per key.

    ``h = seed; for key in keys: h = splitmix64(h ^ splitmix64(key))``.
    Used to give every (K, trial) cell of an experiment its own stream.
    """
    h = seed & MASK64
    for key in keys:
        h = splitmix64(h ^ splitmix64(key & MASK64))
    return h


class Xorshift64Star:
    """xorshift64* generator with uniform and Box-Muller normal draws."""

    __slots__ = ("_state", "_spare")

    def __init__(self, seed: int):
        state = splitmix64(seed & MASK64)
        self._state = state if state else GOLDEN_GAMMA
        self._spare: float | None = None

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * _XORSHIFT_MULT) & MASK64

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _TWO_POW_M53

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection on the top bits."""
        if bound < 1:
            raise ValueError("bound must be positive")
        bits = max(1, (bound - 1).bit_length())
        while True:
            v = self.next_u64() >> (64 - bits)
            if v < bound:
                return v

    def normal(self) -> float:
        if self._spare is not None:
            v, self._spare = self._spare, None
            return v
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare = r * math.sin(theta)
        return r * math.cos(theta)

    def normals(self, count: int) -> np.ndarray:
        out = np.empty(count)
        for i in range(count):
            out[i] = self.normal()
        return out

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """``k`` distinct indices from ``range(n)`` by partial Fisher-Yates, in draw order."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct indices from {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
