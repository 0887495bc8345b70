"""Streaming duplicate-detection filters.

Every filter answers one question per stream element: has this element been
seen before? The verdict is DUPLICATE iff all k probe bits are already set
(the probe always happens before any mutation), after which each algorithm
applies its own insertion/eviction policy:

* ``stdbf``  - plain partitioned Bloom filter; inserts, never evicts.
* ``bsbf``   - inserts every reported-distinct element and pairs each
  insertion with one uniform bit reset per partition.
* ``bsbfsd`` - like ``bsbf`` but resets a single bit in one uniformly chosen
  partition per insertion (conservative eviction, lower false-negative rate
  at the price of more false positives).
* ``rlbsbf`` - per partition, resets a uniformly drawn bit with probability
  load/s before inserting, so eviction pressure tracks occupancy.
* ``rsbf``   - reservoir-sampling insertion schedule: the first s elements
  are inserted outright; afterwards reported-distinct elements are inserted
  with probability s/i (paired with uniform resets) until s/i falls below
  the floor ``pstar``, after which insertion switches to a load-conserving
  delete-then-set of currently-set bits.
* ``sbf``    - stable-Bloom comparator on small counters: every arrival
  decays random cells and refreshes the probed ones to the counter ceiling.

The classes follow scikit-learn conventions (constructor stores parameters,
``get_params``/``set_params``/``clone`` work, fitted state carries a
trailing underscore) so they compose with the wider ecosystem. ``fit`` /
``fit_predict`` consume a finite stream from scratch, ``partial_fit``
continues an open stream, and ``predict`` probes without mutating; note
that ``fit_predict(X)`` is a genuinely streaming pass, not
``fit(X).predict(X)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels
from ._rng import SplitMix64
from .bitarray import PartitionedBitArray
from .hashing import HashFamily, digest_pair
from .validation import (
    as_element_bytes,
    check_positive_int,
    check_unit_interval,
    element_digests,
)


class Verdict(enum.Enum):
    """Per-element answer of a filter."""

    DUPLICATE = "duplicate"
    DISTINCT = "distinct"

    @classmethod
    def from_bool(cls, is_duplicate) -> "Verdict":
        return cls.DUPLICATE if is_duplicate else cls.DISTINCT


class _StreamFilter(BaseEstimator):
    """Shared machinery for the bit-partitioned filters."""

    algorithm: str = ""

    # -- state ------------------------------------------------------------

    def reset(self) -> None:
        """Discard all filter state; parameters are kept."""
        memory_bits = check_positive_int(self.memory_bits, "memory_bits")
        k = check_positive_int(self.k, "k")
        s = memory_bits // k
        if s < 1:
            raise ValueError(
                f"memory_bits={memory_bits} leaves no room for k={k} partitions"
            )
        self.s_ = s
        self.bits_ = PartitionedBitArray(k, s)
        self.hashes_ = HashFamily(k, s, int(self.seed))
        self.rng_ = SplitMix64(int(self.seed))
        self.n_processed_ = 0
        self._reset_extra()

    def _reset_extra(self) -> None:
        pass

    def _ensure_state(self) -> None:
        if not hasattr(self, "bits_"):
            self.reset()

    # -- streaming interface ------------------------------------------------

    def process(self, element) -> Verdict:
        """Feed one element; returns its verdict and updates the filter."""
        self._ensure_state()
        g1, g2 = digest_pair(as_element_bytes(element), self.hashes_.seed)
        verdicts, _ = self.process_digests(
            np.array([g1], dtype=np.uint64), np.array([g2], dtype=np.uint64)
        )
        return Verdict.from_bool(bool(verdicts[0]))

    def process_digests(
        self, g1: np.ndarray, g2: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Bulk interface for pre-digested elements.

        Returns (verdicts, loads): verdicts[t] is 1 where element t was
        reported a duplicate, loads[t] the total set-bit count after
        element t was absorbed.
        """
        self._ensure_state()
        n = g1.shape[0]
        verdicts = np.empty(n, dtype=np.uint8)
        loads = np.empty(n, dtype=np.int64)
        self._run_kernel(g1, g2, verdicts, loads)
        self.n_processed_ += n
        return verdicts, loads

    def fit(self, X, y=None):
        """Consume a stream from scratch."""
        self.fit_predict(X)
        return self

    def partial_fit(self, X, y=None):
        """Consume more of an open stream without resetting."""
        self._ensure_state()
        g1, g2 = element_digests(X, self.hashes_.seed)
        self.process_digests(g1, g2)
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        """Streaming pass over X; True where an element was reported duplicate."""
        self.reset()
        g1, g2 = element_digests(X, self.hashes_.seed)
        verdicts, _ = self.process_digests(g1, g2)
        return verdicts.astype(bool)

    def predict(self, X) -> np.ndarray:
        """Probe-only verdicts for X with no state change."""
        self._ensure_state()
        g1, g2 = element_digests(X, self.hashes_.seed)
        out = np.empty(g1.shape[0], dtype=np.uint8)
        _kernels.probe_chunk(self.bits_.words, g1, g2, self.s_, out)
        return out.astype(bool)

    # -- introspection ------------------------------------------------------

    @property
    def loads_(self) -> np.ndarray:
        self._ensure_state()
        return self.bits_.load

    def load_fraction(self) -> float:
        """Set bits over total memory bits."""
        self._ensure_state()
        return self.bits_.load_fraction()

    def state_signature(self) -> bytes:
        """Raw bit matrix; equal signatures mean bit-identical filters."""
        self._ensure_state()
        return self.bits_.words.tobytes()

    def _run_kernel(self, g1, g2, verdicts, loads) -> None:
        raise NotImplementedError


class StandardBloomFilter(_StreamFilter):
    """Insert-only baseline: false positives possible, false negatives never."""

    algorithm = "stdbf"

    def __init__(self, memory_bits: int = 1 << 20, k: int = 2, seed: int = 0):
        self.memory_bits = memory_bits
        self.k = k
        self.seed = seed

    def _run_kernel(self, g1, g2, verdicts, loads) -> None:
        _kernels.run_stdbf(
            self.bits_.words, self.bits_.load, g1, g2, self.s_, verdicts, loads
        )


class BiasedSamplingBloomFilter(_StreamFilter):
    """Always-insert filter with one paired uniform reset per partition.

    The deletion draw precedes the insertion, so an element can never evict
    its own just-written bits; duplicate verdicts leave the state untouched.
    """

    algorithm = "bsbf"

    def __init__(self, memory_bits: int = 1 << 20, k: int = 2, seed: int = 0):
        self.memory_bits = memory_bits
        self.k = k
        self.seed = seed

    def _run_kernel(self, g1, g2, verdicts, loads) -> None:
        _kernels.run_bsbf(
            self.bits_.words, self.bits_.load, self.rng_.state,
            g1, g2, self.s_, verdicts, loads,
        )


class SingleDeletionBloomFilter(_StreamFilter):
    """Biased-sampling variant that evicts a single bit per insertion.

    The deletion target is one draw over the k*s bit space decomposed into
    (partition, position); with k=1 this consumes exactly the draws of
    :class:`BiasedSamplingBloomFilter`, making the two verdict-identical at
    matched seeds.
    """

    algorithm = "bsbfsd"

    def __init__(self, memory_bits: int = 1 << 20, k: int = 2, seed: int = 0):
        self.memory_bits = memory_bits
        self.k = k
        self.seed = seed

    def _run_kernel(self, g1, g2, verdicts, loads) -> None:
        _kernels.run_bsbfsd(
            self.bits_.words, self.bits_.load, self.rng_.state,
            g1, g2, self.s_, verdicts, loads,
        )


class LoadBalancedBloomFilter(_StreamFilter):
    """Biased-sampling variant with load-proportional eviction.

    Per partition, a uniformly drawn bit is reset with probability load/s
    before the insertion, so an empty partition never evicts and a saturated
    one always attempts to.
    """

    algorithm = "rlbsbf"

    def __init__(self, memory_bits: int = 1 << 20, k: int = 2, seed: int = 0):
        self.memory_bits = memory_bits
        self.k = k
        self.seed = seed

    def _run_kernel(self, g1, g2, verdicts, loads) -> None:
        _kernels.run_rlbsbf(
            self.bits_.words, self.bits_.load, self.rng_.state,
            g1, g2, self.s_, verdicts, loads,
        )


class ReservoirSamplingBloomFilter(_StreamFilter):
    """Reservoir-sampling insertion schedule over partitioned Bloom filters.

    ``pstar`` is the insertion-probability floor: once s/i <= pstar
    (equivalently i >= ceil(s / pstar), exposed as ``phase3_start_``),
    reported-distinct elements are always inserted via a paired
    delete-then-set that conserves each touched partition's load. If a
    partition is empty when the paired reset is due (unreachable in any
    realistic run), the reset is skipped and the set still happens.
    """

    algorithm = "rsbf"

    def __init__(
        self,
        memory_bits: int = 1 << 20,
        k: int = 2,
        pstar: float = 0.03,
        seed: int = 0,
    ):
        self.memory_bits = memory_bits
        self.k = k
        self.pstar = pstar
        self.seed = seed

    def _reset_extra(self) -> None:
        pstar = check_unit_interval(self.pstar, "pstar", closed_right=True)
        self.phase3_start_ = math.ceil(self.s_ / pstar)
        self._iteration = np.zeros(1, dtype=np.int64)

    @property
    def iteration_(self) -> int:
        """1-based position of the most recently processed element."""
        self._ensure_state()
        return int(self._iteration[0])

    @property
    def phase_(self) -> int:
        """Current regime: 1 fill, 2 reservoir, 3 always-insert."""
        self._ensure_state()
        nxt = self._iteration[0] + 1
        if nxt <= self.s_:
            return 1
        return 3 if nxt >= self.phase3_start_ else 2

    def _run_kernel(self, g1, g2, verdicts, loads) -> None:
        _kernels.run_rsbf(
            self.bits_.words, self.bits_.load, self.rng_.state,
            self._iteration, g1, g2, self.s_, self.phase3_start_,
            verdicts, loads,
        )


def stable_decrement_count(
    n_cells: int, probes: int, max_value: int, fpr_target: float
) -> int:
    """Decrements per arrival that stabilize a stable-Bloom filter at the
    target false-positive rate.

    Solves the stationary zero-cell equation of the classic stable-Bloom
    design for P given the cell count, probe count and counter ceiling.
    """
    if probes >= n_cells:
        raise ValueError(f"probes={probes} must be < n_cells={n_cells}")
    z = 1.0 - fpr_target ** (1.0 / probes)
    q = z ** (1.0 / max_value)
    p = q / ((1.0 - q) * (1.0 / probes - 1.0 / n_cells))
    return max(1, round(p))


class StableBloomFilter(_StreamFilter):
    """Stable-Bloom comparator: counters that decay under random decrements.

    State is a flat array of ``memory_bits // counter_bits`` cells holding
    ``counter_bits``-bit counters. Every arrival (duplicate or not)
    decrements ``decrements`` uniformly chosen cells by one (floored at
    zero), then sets the probed cells to the counter maximum. When
    ``decrements`` is None it is derived from ``fpr_threshold`` via
    :func:`stable_decrement_count`.
    """

    algorithm = "sbf"

    def __init__(
        self,
        memory_bits: int = 1 << 20,
        k: int = 2,
        fpr_threshold: float = 0.1,
        counter_bits: int = 3,
        decrements: int | None = None,
        seed: int = 0,
    ):
        self.memory_bits = memory_bits
        self.k = k
        self.fpr_threshold = fpr_threshold
        self.counter_bits = counter_bits
        self.decrements = decrements
        self.seed = seed

    def reset(self) -> None:
        memory_bits = check_positive_int(self.memory_bits, "memory_bits")
        probes = check_positive_int(self.k, "k")
        counter_bits = check_positive_int(self.counter_bits, "counter_bits")
        if counter_bits > 8:
            raise ValueError(f"counter_bits must be <= 8, got {counter_bits}")
        n_cells = memory_bits // counter_bits
        if n_cells < 1:
            raise ValueError("memory_bits leaves no room for any counter cell")
        self.n_cells_ = n_cells
        self.max_value_ = (1 << counter_bits) - 1
        if self.decrements is None:
            fpr = check_unit_interval(self.fpr_threshold, "fpr_threshold")
            self.decrements_ = stable_decrement_count(
                n_cells, probes, self.max_value_, fpr
            )
        else:
            self.decrements_ = check_positive_int(
                self.decrements, "decrements", minimum=0
            )
        self.cells_ = np.zeros(n_cells, dtype=np.uint8)
        self.hashes_ = HashFamily(probes, n_cells, int(self.seed))
        self.rng_ = SplitMix64(int(self.seed))
        self._nonzero = np.zeros(1, dtype=np.int64)
        self.n_processed_ = 0

    def _ensure_state(self) -> None:
        if not hasattr(self, "cells_"):
            self.reset()

    def process_digests(self, g1, g2):
        self._ensure_state()
        n = g1.shape[0]
        verdicts = np.empty(n, dtype=np.uint8)
        loads = np.empty(n, dtype=np.int64)
        _kernels.run_sbf(
            self.cells_, self.rng_.state, g1, g2,
            self.hashes_.k, self.decrements_, self.max_value_,
            self._nonzero, verdicts, loads,
        )
        self.n_processed_ += n
        return verdicts, loads

    def predict(self, X) -> np.ndarray:
        self._ensure_state()
        g1, g2 = element_digests(X, self.hashes_.seed)
        out = np.empty(g1.shape[0], dtype=np.uint8)
        _kernels.probe_sbf_chunk(self.cells_, g1, g2, self.hashes_.k, out)
        return out.astype(bool)

    @property
    def loads_(self) -> np.ndarray:
        self._ensure_state()
        return self._nonzero.copy()

    def load_fraction(self) -> float:
        """Nonzero cells over total cells."""
        self._ensure_state()
        return float(self._nonzero[0]) / self.n_cells_

    def state_signature(self) -> bytes:
        self._ensure_state()
        return self.cells_.tobytes()


ALGORITHMS: dict[str, type[_StreamFilter]] = {
    cls.algorithm: cls
    for cls in (
        ReservoirSamplingBloomFilter,
        BiasedSamplingBloomFilter,
        SingleDeletionBloomFilter,
        LoadBalancedBloomFilter,
        StandardBloomFilter,
        StableBloomFilter,
    )
}

#: The algorithms introduced by this package (excludes the two comparators).
PROPOSED_ALGORITHMS = ("rsbf", "bsbf", "bsbfsd", "rlbsbf")


@dataclass
class FilterConfig:
    """Uniform construction recipe resolved by the experiment harness."""

    algorithm: str = "bsbf"
    memory_bits: int = 1 << 20
    k: int = 2
    fpr_threshold: float = 0.1
    pstar: float = 0.03
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm {self.algorithm!r}; "
                f"choose from {sorted(ALGORITHMS)}"
            )
        check_positive_int(self.memory_bits, "memory_bits")
        check_positive_int(self.k, "k")
        if self.memory_bits // self.k < 1:
            raise ValueError("memory_bits must allow at least 1 bit per partition")
        check_unit_interval(self.fpr_threshold, "fpr_threshold")
        check_unit_interval(self.pstar, "pstar", closed_right=True)


def make_filter(config: FilterConfig) -> _StreamFilter:
    """Instantiate the filter described by a :class:`FilterConfig`."""
    common = dict(memory_bits=config.memory_bits, k=config.k, seed=config.seed)
    if config.algorithm == "rsbf":
        return ReservoirSamplingBloomFilter(pstar=config.pstar, **common)
    if config.algorithm == "sbf":
        return StableBloomFilter(fpr_threshold=config.fpr_threshold, **common)
    return ALGORITHMS[config.algorithm](**common)
