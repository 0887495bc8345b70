"""Input coercion and parameter checks shared by the estimators."""

from __future__ import annotations

import numbers

import numpy as np

from .hashing import digest_pair, digest_pairs_u64


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_unit_interval(value, name: str, *, closed_right: bool = False) -> float:
    value = float(value)
    ok = 0.0 < value <= 1.0 if closed_right else 0.0 < value < 1.0
    if not ok:
        bound = "(0, 1]" if closed_right else "(0, 1)"
        raise ValueError(f"{name} must be in {bound}, got {value}")
    return value


def as_element_bytes(element) -> bytes:
    """Coerce one stream element to its identity byte string.

    Accepted forms: raw bytes (used as-is), str (UTF-8), unsigned integers
    (8-byte little-endian, the synthetic-stream encoding).
    """
    if isinstance(element, bytes):
        return element
    if isinstance(element, (bytearray, memoryview)):
        return bytes(element)
    if isinstance(element, str):
        return element.encode("utf-8")
    if isinstance(element, (int, np.integer)):
        v = int(element)
        if not 0 <= v < 1 << 64:
            raise ValueError(f"integer elements must fit in uint64, got {v}")
        return v.to_bytes(8, "little")
    raise TypeError(f"unsupported element type: {type(element).__name__}")


def element_digests(X, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Digest a collection of elements into (g1, g2) uint64 arrays.

    Integer arrays go through the vectorized path; anything else is digested
    element by element via :func:`as_element_bytes`. A single bytes/str
    object is rejected to avoid silently iterating its characters.
    """
    if isinstance(X, (bytes, str, bytearray)):
        raise TypeError(
            "X must be a sequence of elements; wrap a single element in a "
            "list or use process()"
        )
    if isinstance(X, np.ndarray) and X.dtype.kind in ("i", "u"):
        if X.ndim != 1:
            raise ValueError(f"element arrays must be 1-D, got shape {X.shape}")
        if X.dtype.kind == "i" and X.size and int(X.min()) < 0:
            raise ValueError("integer elements must be non-negative")
        return digest_pairs_u64(X.astype(np.uint64, copy=False), seed)
    g1 = []
    g2 = []
    for element in X:
        a, b = digest_pair(as_element_bytes(element), seed)
        g1.append(a)
        g2.append(b)
    return np.array(g1, dtype=np.uint64), np.array(g2, dtype=np.uint64)
