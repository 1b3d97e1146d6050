"""Counter-mode seeding: one 64-bit master seed, one SplitMix64 stream per trial."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sympy import nextprime

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def trial_seed(master: int, trial_index: int) -> int:
    return mix64((master & MASK64) ^ ((trial_index * GOLDEN) & MASK64))


class SplitMix64:
    """Plain SplitMix64 generator; ``uniforms`` and ``next_u64`` share one counter."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def u64_block(self, k: int) -> np.ndarray:
        steps = np.arange(1, k + 1, dtype=np.uint64) * np.uint64(GOLDEN)
        out = _mix64_array(np.uint64(self.state) + steps)
        self.state = (self.state + k * GOLDEN) & MASK64
        return out

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, k: int) -> np.ndarray:
        """k doubles in [0, 1), bit-identical to k calls of ``random``."""
        return (self.u64_block(k) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def randbelow(self, k: int) -> int:
        return int(self.random() * k)

    def prime30(self) -> int:
        """A prime in [2^29, 2^30) drawn from the stream."""
        while True:
            q = nextprime((1 << 29) + (self.next_u64() >> 35))
            if q < 1 << 30:
                return int(q)


@dataclass(frozen=True)
class SeedScheme:
    master: int
    trial_index: int = 0

    @property
    def seed(self) -> int:
        return trial_seed(self.master, self.trial_index)

    def stream(self) -> SplitMix64:
        return SplitMix64(self.seed)
