"""Deterministic hash family mapping one element to one position per partition.

Positions come from the double-hashing construction of Kirsch & Mitzenmacher
("Less hashing, same performance", 2006): two 64-bit digests g1, g2 of the
element give position_i = (g1 + i * g2') mod s, with g2' forced odd. Two
digest computations cover any k and preserve the usual Bloom-filter false
positive asymptotics.

The digest itself is a seeded splitmix64 lane chain over the element bytes
(8-byte little-endian lanes, zero-padded tail, length folded in at the end).
It is not cryptographic. Integer elements take a vectorized fast path that
produces bit-identical digests to hashing their 8-byte little-endian
encoding.
"""

from __future__ import annotations

import numpy as np

from ._rng import mix64

_MASK = (1 << 64) - 1
_CHAIN_1 = 0xA0761D6478BD642F
_CHAIN_2 = 0xE7037ED1A0B428DB


def digest_pair(data: bytes, seed: int) -> tuple[int, int]:
    """Two 64-bit digests of a byte string; pure function of (data, seed)."""
    h1 = mix64(seed ^ _CHAIN_1)
    h2 = mix64(seed ^ _CHAIN_2)
    n = len(data)
    for off in range(0, n, 8):
        lane = int.from_bytes(data[off:off + 8], "little")
        h1 = mix64(h1 ^ lane)
        h2 = mix64(h2 ^ lane)
    h1 = mix64(h1 ^ n)
    h2 = mix64(h2 ^ n)
    return h1, h2


def _mix64_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z ^ (z >> np.uint64(30))
        z = z * np.uint64(0xBF58476D1CE4E5B9)
        z = z ^ (z >> np.uint64(27))
        z = z * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def digest_pairs_u64(values: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized digests of uint64 ids, identical to hashing their 8-byte
    little-endian encodings through :func:`digest_pair`."""
    v = np.ascontiguousarray(values, dtype=np.uint64)
    h1 = _mix64_array(np.uint64(mix64(seed ^ _CHAIN_1)) ^ v)
    h2 = _mix64_array(np.uint64(mix64(seed ^ _CHAIN_2)) ^ v)
    h1 = _mix64_array(h1 ^ np.uint64(8))
    h2 = _mix64_array(h2 ^ np.uint64(8))
    return h1, h2


class HashFamily:
    """k hash functions with range [0, s), derived from one 64-bit seed.

    Stateless after construction; safe for concurrent use.
    """

    def __init__(self, k: int, s: int, seed: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if s < 1:
            raise ValueError(f"s must be >= 1, got {s}")
        self.k = k
        self.s = s
        self.seed = seed & _MASK

    def map(self, element: bytes) -> np.ndarray:
        """Positions of one element, one per partition."""
        g1, g2 = digest_pair(element, self.seed)
        return self.positions(g1, g2)

    def positions(self, g1: int, g2: int) -> np.ndarray:
        g2 |= 1
        return np.array(
            [(g1 + i * g2) % self.s for i in range(self.k)], dtype=np.int64
        )
