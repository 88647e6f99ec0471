"""Deterministic PRNG for splits and synthetic data.

xoshiro256++ with splitmix64 seeding (the generator's published constants),
so that a seed produces the same stream on every platform. Gaussians come
from the basic Box-Muller transform; each call to :meth:`gaussian` consumes
two uniforms and caches the second variate.
"""

import math

_MASK = 0xFFFFFFFFFFFFFFFF


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def _splitmix64(state: int):
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Xoshiro256PlusPlus:
    """Seeded 64-bit generator; the stream order is part of the contract."""

    def __init__(self, seed: int):
        state = int(seed) & _MASK
        s = []
        for _ in range(4):
            state, word = _splitmix64(state)
            s.append(word)
        self._s = s
        self._spare_gauss = None

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_uint64() >> 11) * (2.0**-53)

    def uniform_open(self) -> float:
        """Uniform double in (0, 1], safe as a log() argument."""
        return ((self.next_uint64() >> 11) + 1) * (2.0**-53)

    def gaussian(self) -> float:
        if self._spare_gauss is not None:
            g = self._spare_gauss
            self._spare_gauss = None
            return g
        u1 = self.uniform_open()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare_gauss = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def gaussians(self, count: int) -> list:
        return [self.gaussian() for _ in range(count)]

    def integer_below(self, n: int) -> int:
        """Unbiased draw from {0, ..., n-1} by rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = _MASK + 1 - ((_MASK + 1) % n)
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.integer_below(i + 1)
            items[i], items[j] = items[j], items[i]
