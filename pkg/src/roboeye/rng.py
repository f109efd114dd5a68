"""Seedable, portable random generator for reproducible simulation traces.

SplitMix64 core with Box-Muller gaussians; the algorithm is fixed so traces
are bit-identical across platforms and Python versions.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """64-bit splitmix generator. Same seed -> same stream, everywhere."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._spare: float | None = None

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform in [0, 1), 53-bit resolution."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Standard Box-Muller; caches the second deviate."""
        if self._spare is not None:
            z, self._spare = self._spare, None
            return mu + sigma * z
        # u1 in (0, 1] so log() is safe
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return mu + sigma * r * math.cos(2.0 * math.pi * u2)
