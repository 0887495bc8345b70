"""Bloom-filter sketches for approximate duplicate detection in streams.

Feed elements one at a time (or as arrays) to one of the filters and get a
DUPLICATE/DISTINCT verdict per element in bounded memory. Deleting variants
trade a controlled false-negative rate for a false-positive rate that stays
flat on unbounded streams; the :mod:`~streamdedup.theory` module carries the
matching analytical recurrences and the CLI (``dedup``) reproduces the
quality experiments.
"""

from .bitarray import PartitionedBitArray
from .filters import (
    ALGORITHMS,
    PROPOSED_ALGORITHMS,
    BiasedSamplingBloomFilter,
    FilterConfig,
    LoadBalancedBloomFilter,
    ReservoirSamplingBloomFilter,
    SingleDeletionBloomFilter,
    StableBloomFilter,
    StandardBloomFilter,
    Verdict,
    make_filter,
    stable_decrement_count,
)
from .hashing import HashFamily, digest_pair, digest_pairs_u64
from .metrics import Counters, ExactOracle, counters_from_arrays, load_fraction, observe, rates
from .streams import StreamSpec, first_occurrence_duplicates, generate, ingest_file, synthetic_ids
from .theory import (
    choose_k,
    evaluate_X_bsbf_direct,
    iterate_X_bsbf,
    iterate_X_bsbfsd,
    iterate_X_rlbsbf,
    iterate_X_rsbf,
    k_formula,
    prob_distinct,
    rates_from_XY,
    rsbf_closed_form_fpr,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "PROPOSED_ALGORITHMS",
    "BiasedSamplingBloomFilter",
    "Counters",
    "ExactOracle",
    "FilterConfig",
    "HashFamily",
    "LoadBalancedBloomFilter",
    "PartitionedBitArray",
    "ReservoirSamplingBloomFilter",
    "SingleDeletionBloomFilter",
    "StableBloomFilter",
    "StandardBloomFilter",
    "StreamSpec",
    "Verdict",
    "choose_k",
    "counters_from_arrays",
    "digest_pair",
    "digest_pairs_u64",
    "evaluate_X_bsbf_direct",
    "first_occurrence_duplicates",
    "generate",
    "ingest_file",
    "iterate_X_bsbf",
    "iterate_X_bsbfsd",
    "iterate_X_rlbsbf",
    "iterate_X_rsbf",
    "k_formula",
    "load_fraction",
    "make_filter",
    "observe",
    "prob_distinct",
    "rates",
    "rates_from_XY",
    "rsbf_closed_form_fpr",
    "stable_decrement_count",
    "synthetic_ids",
]
