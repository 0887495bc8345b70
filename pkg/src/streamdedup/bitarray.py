"""Partitioned bit storage with exact load bookkeeping.

Every filter in this package is built on k independent bit partitions of s
bits each (k*s = the configured memory budget). The partition loads (number
of set bits) are maintained incrementally and are guaranteed to equal the
popcount of the backing words at all times.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from ._rng import SplitMix64


class PartitionedBitArray:
    """k partitions of s bits stored as contiguous 64-bit words.

    Not internally synchronized: an instance may move between threads but
    must be used by one thread at a time.
    """

    def __init__(self, k: int, s: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if s < 1:
            raise ValueError(f"s must be >= 1, got {s}")
        self.k = k
        self.s = s
        self.words = np.zeros((k, (s + 63) // 64), dtype=np.uint64)
        self.load = np.zeros(k, dtype=np.int64)

    def get_bit(self, partition: int, position: int) -> bool:
        self._check(partition, position)
        return bool(_kernels.bit_get(self.words, partition, position))

    def set_bit(self, partition: int, position: int) -> bool:
        """Set one bit; returns True iff it was previously clear."""
        self._check(partition, position)
        return bool(_kernels.bit_set(self.words, self.load, partition, position))

    def reset_bit(self, partition: int, position: int) -> bool:
        """Clear one bit; returns True iff it was previously set."""
        self._check(partition, position)
        return bool(_kernels.bit_clear(self.words, self.load, partition, position))

    def sample_uniform_position(self, rng: SplitMix64) -> int:
        """Uniform position in [0, s), deterministic given the rng state."""
        return rng.uniform_index(self.s)

    def sample_set_position(self, partition: int, rng: SplitMix64) -> int:
        """Uniform position among the currently-set bits of one partition."""
        self._check(partition, 0)
        if self.load[partition] < 1:
            raise ValueError(f"no set bit available in partition {partition}")
        return int(
            _kernels.sample_set_position(
                self.words, self.load, partition, self.s, rng.state
            )
        )

    def popcounts(self) -> np.ndarray:
        """Recount set bits from the raw words (load cross-check)."""
        return np.bitwise_count(self.words).sum(axis=1).astype(np.int64)

    def total_load(self) -> int:
        return int(self.load.sum())

    def load_fraction(self) -> float:
        return self.total_load() / (self.k * self.s)

    def _check(self, partition: int, position: int) -> None:
        if not (0 <= partition < self.k and 0 <= position < self.s):
            raise IndexError(
                f"bit ({partition}, {position}) out of range for "
                f"{self.k}x{self.s} array"
            )
