"""Seeded counter-based random generator used by all mutating filters.

A splitmix64 counter is small, portable and fast enough to live inside the
JIT kernels; the same state array is advanced whether draws happen from
Python or from compiled code, so replaying a seed replays every decision.
"""

from __future__ import annotations

import numpy as np

from . import _kernels

_MASK = (1 << 64) - 1


def mix64(value: int) -> int:
    """Pure-python splitmix64 finalizer (matches the compiled one)."""
    z = value & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic 64-bit generator with injectable state.

    The ``state`` array is shared with the kernels: handing it to a kernel
    and drawing from Python interleave on the same sequence.
    """

    def __init__(self, seed: int):
        self.state = np.array([mix64(seed ^ 0x726E67)], dtype=np.uint64)

    def next_u64(self) -> int:
        return int(_kernels.rng_next(self.state))

    def uniform_index(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        return int(_kernels.rng_index(self.state, n))

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return float(_kernels.rng_unit(self.state))
