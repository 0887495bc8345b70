"""Synthetic stream generation and record-file ingestion.

Two synthetic modes cover the experiment grid:

* ``uniform``    - N i.i.d. draws from a universe of ``universe_size`` ids.
* ``controlled`` - exactly round(distinct_fraction * N) distinct ids; the
  positions introducing a new id are a uniform shuffle (position 0 forced to
  introduce one so every duplicate has an antecedent), and every other
  position re-emits an id drawn uniformly from those introduced so far,
  i.e. duplicate pressure resembles a uniform finite universe restricted to
  the seen ids while the distinct count is hit exactly.

Synthetic elements are 8-byte little-endian encodings of uint64 ids, so
streams are reproducible across platforms and hashing cost is flat. ``file``
mode yields one element per newline-delimited record.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .validation import check_positive_int, check_unit_interval

MODES = ("uniform", "controlled", "file")


@dataclass
class StreamSpec:
    """Description of one reproducible input stream."""

    mode: str = "controlled"
    n: int = 100_000
    universe_size: int = 1 << 20
    distinct_fraction: float = 0.6
    path: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.mode == "file":
            if not self.path:
                raise ValueError("file mode requires a path")
            return
        check_positive_int(self.n, "n")
        if self.mode == "uniform":
            check_positive_int(self.universe_size, "universe_size")
        else:
            d = check_unit_interval(
                self.distinct_fraction, "distinct_fraction", closed_right=True
            )
            if round(d * self.n) < 1:
                raise ValueError(
                    f"distinct_fraction={d} with n={self.n} yields no distinct "
                    f"elements"
                )


def synthetic_ids(spec: StreamSpec) -> tuple[np.ndarray, np.ndarray]:
    """(ids, truth) for a synthetic spec: uint64 ids and exact ground-truth
    labels (truth[t] is True iff ids[t] occurred strictly earlier)."""
    if spec.mode == "uniform":
        rng = np.random.default_rng(spec.seed)
        ids = rng.integers(0, spec.universe_size, size=spec.n, dtype=np.uint64)
        return ids, first_occurrence_duplicates(ids)
    if spec.mode == "controlled":
        return _controlled_ids(spec)
    raise ValueError(f"no synthetic ids for mode {spec.mode!r}")


def _controlled_ids(spec: StreamSpec) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    n_distinct = round(spec.distinct_fraction * n)
    introduces = np.zeros(n, dtype=bool)
    introduces[:n_distinct] = True
    rng.shuffle(introduces)
    if not introduces[0]:
        introduces[int(np.argmax(introduces))] = False
        introduces[0] = True
    ids = np.empty(n, dtype=np.uint64)
    ids[introduces] = np.arange(n_distinct, dtype=np.uint64)
    seen_before = np.cumsum(introduces) - introduces  # exclusive running count
    dup_pos = ~introduces
    draws = rng.random(int(dup_pos.sum()))
    ids[dup_pos] = (draws * seen_before[dup_pos]).astype(np.uint64)
    return ids, dup_pos


def first_occurrence_duplicates(ids: np.ndarray) -> np.ndarray:
    """Exact duplicate labels: True everywhere except first occurrences."""
    _, first_idx = np.unique(ids, return_index=True)
    truth = np.ones(ids.shape[0], dtype=bool)
    truth[first_idx] = False
    return truth


def encode_id(value: int) -> bytes:
    """Canonical 8-byte little-endian element encoding of a synthetic id."""
    return int(value).to_bytes(8, "little")


def generate(spec: StreamSpec) -> Iterator[bytes]:
    """Element iterator for any spec; deterministic given the seed."""
    if spec.mode == "file":
        yield from ingest_file(spec.path)
        return
    ids, _ = synthetic_ids(spec)
    for v in ids:
        yield encode_id(int(v))


def ingest_file(path: str | os.PathLike) -> Iterator[bytes]:
    """One element per line, line terminator stripped, empty lines skipped.

    I/O failures mid-stream are re-raised with the 1-based line number.
    """
    line_no = 0
    try:
        with open(path, "rb") as fh:
            for raw in fh:
                line_no += 1
                record = raw.rstrip(b"\r\n")
                if record:
                    yield record
    except OSError as exc:
        raise OSError(f"{path}: read failed at line {line_no + 1}: {exc}") from exc
