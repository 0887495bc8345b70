"""Exact ground-truth labeling and false-positive/false-negative accounting.

Rate denominators: the false-positive rate divides by the count of
actually-distinct elements, the false-negative rate by the count of
actually-duplicate elements, matching the conditional-event structure of
the analytical model. Both are reported in percent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import Verdict
from .hashing import digest_pair
from .validation import as_element_bytes


class ExactOracle:
    """Exact first-occurrence labeler.

    ``digest`` storage keeps one 64-bit digest per distinct element (a
    digest collision mislabels a distinct element as duplicate with
    probability about n^2 / 2^65 over an n-element stream: irrelevant below
    billions of records). ``exact`` storage keeps the raw bytes and can
    never mislabel; use it for small streams and verification.
    """

    def __init__(self, storage: str = "digest", seed: int = 0):
        if storage not in ("digest", "exact"):
            raise ValueError(f"storage must be 'digest' or 'exact', got {storage!r}")
        self.storage = storage
        self._seed = seed
        self._seen: set = set()

    def _key(self, element):
        data = as_element_bytes(element)
        if self.storage == "exact":
            return data
        return digest_pair(data, self._seed)[0]

    def label(self, element) -> Verdict:
        """Ground truth for the next element, before it is recorded."""
        return Verdict.from_bool(self._key(element) in self._seen)

    def record(self, element) -> None:
        self._seen.add(self._key(element))

    def label_and_record(self, element) -> Verdict:
        key = self._key(element)
        verdict = Verdict.from_bool(key in self._seen)
        self._seen.add(key)
        return verdict

    def __len__(self) -> int:
        return len(self._seen)


@dataclass
class Counters:
    """Outcome counts for one filter run."""

    fp: int = 0
    fn: int = 0
    tp_dup: int = 0
    tn_dis: int = 0

    @property
    def n_distinct(self) -> int:
        return self.fp + self.tn_dis

    @property
    def n_duplicate(self) -> int:
        return self.fn + self.tp_dup

    @property
    def total(self) -> int:
        return self.fp + self.fn + self.tp_dup + self.tn_dis


def observe(counters: Counters, truth: Verdict, verdict: Verdict) -> None:
    """Record one (ground truth, filter verdict) pair."""
    if truth is Verdict.DISTINCT:
        if verdict is Verdict.DUPLICATE:
            counters.fp += 1
        else:
            counters.tn_dis += 1
    else:
        if verdict is Verdict.DISTINCT:
            counters.fn += 1
        else:
            counters.tp_dup += 1


def rates(counters: Counters) -> tuple[float, float]:
    """(fpr_pct, fnr_pct); empty denominators yield 0."""
    fpr = 100.0 * counters.fp / max(counters.n_distinct, 1)
    fnr = 100.0 * counters.fn / max(counters.n_duplicate, 1)
    return fpr, fnr


def counters_from_arrays(truth: np.ndarray, verdicts: np.ndarray) -> Counters:
    """Vectorized tally over boolean (is-duplicate) truth/verdict arrays."""
    truth = np.asarray(truth, dtype=bool)
    verdicts = np.asarray(verdicts, dtype=bool)
    return Counters(
        fp=int((~truth & verdicts).sum()),
        fn=int((truth & ~verdicts).sum()),
        tp_dup=int((truth & verdicts).sum()),
        tn_dis=int((~truth & ~verdicts).sum()),
    )


def load_fraction(filt) -> float:
    """Set bits (nonzero cells for the counter comparator) over total slots."""
    return filt.load_fraction()
