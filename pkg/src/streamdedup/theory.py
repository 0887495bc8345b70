"""Analytical model of the deleting Bloom-filter sketches.

The central quantity is X_m: the probability that all k probe bits of the
m-th stream element are already set when it arrives. Combined with Y_m (the
probability that element m is genuinely distinct under uniform draws from a
finite universe of size U) it decomposes the outcome of every probe:

    false positive  = Y * X        (distinct, reported duplicate)
    false negative  = (1-Y) * (1-X)
    true duplicate  = (1-Y) * X
    true distinct   = Y * (1-X)

Each deleting filter admits a one-step recurrence for X of the shape

    X_{m+1} = [ X_m^(1/k) * (X_m + (1-X_m) * f) + (1-X_m) / d ]^k

with a per-algorithm survival factor f and insertion denominator d. The
recurrences are iterated on u = X^(1/k), where every step adds an explicitly
non-negative increment; this keeps the sequence non-decreasing in floating
point and clamps cleanly at the fixed point 1. X_1 = 0 and X_2 = s^-k in
all cases.

These are mean-field approximations: they treat the inserted element's
positions as unconditioned uniform draws. They track simulation closely
while filters are well below their stationary occupancy (large s relative
to the insert count) and overestimate X beyond it; see the experiment
harness for side-by-side sweeps.

All arithmetic is 64-bit floating point.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .validation import check_positive_int, check_unit_interval

#: Largest m accepted by the quadratic-cost direct evaluation.
DIRECT_FORM_CAP = 2000


def prob_distinct(universe_size: int, m: int) -> float:
    """Y: probability a fresh uniform draw differs from all m predecessors."""
    universe_size = check_positive_int(universe_size, "universe_size")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return ((universe_size - 1) / universe_size) ** m


def rates_from_XY(X, Y):
    """(FPR, FNR, DUP, DIS) from the all-bits-set and actually-distinct
    probabilities; accepts scalars or arrays, the four sum to 1."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    fpr = Y * X
    fnr = (1.0 - Y) * (1.0 - X)
    dup = (1.0 - Y) * X
    dis = Y * (1.0 - X)
    if fpr.ndim == 0:
        return float(fpr), float(fnr), float(dup), float(dis)
    return fpr, fnr, dup, dis


def _check_ks(k: int, s: int, m_max: int) -> tuple[int, int, int]:
    return (
        check_positive_int(k, "k"),
        check_positive_int(s, "s"),
        check_positive_int(m_max, "m_max"),
    )


def iterate_X_bsbf(k: int, s: int, m_max: int) -> np.ndarray:
    """X_1..X_{m_max} for the uniform-deletion filter; index m-1 holds X_m."""
    k, s, m_max = _check_ks(k, s, m_max)
    return _kernels.theory_uniform_deletion(k, s, m_max)


def iterate_X_bsbfsd(k: int, s: int, m_max: int) -> np.ndarray:
    """X sequence for the single-deletion variant (survival factor 1 - 1/(ks))."""
    k, s, m_max = _check_ks(k, s, m_max)
    return _kernels.theory_single_deletion(k, s, m_max)


def iterate_X_rlbsbf(
    k: int, s: int, load_trajectory: np.ndarray, m_max: int
) -> np.ndarray:
    """X sequence for the load-balanced variant.

    ``load_trajectory[i]`` is the expected per-partition load when element
    i+1 arrives (stepping to X_{m+1} consumes index m). The derivation of a
    closed-form load law is open, so the trajectory is supplied externally,
    typically measured from simulation; a constant array is also valid.
    """
    k, s, m_max = _check_ks(k, s, m_max)
    traj = np.ascontiguousarray(load_trajectory, dtype=np.float64)
    if traj.shape[0] < m_max:
        raise ValueError(
            f"load trajectory has {traj.shape[0]} entries, need >= {m_max}"
        )
    if traj.size and (traj.min() < 0.0 or traj.max() > s):
        raise ValueError("load trajectory values must lie in [0, s]")
    return _kernels.theory_load_balanced(k, s, traj, m_max)


def iterate_X_rsbf(k: int, s: int, pstar: float, m_max: int) -> np.ndarray:
    """X sequence for the reservoir filter.

    While m <= s the fill law [1 - (1-1/s)^m]^k applies (everything is
    inserted, nothing deleted); the reservoir regime then iterates with
    insertion denominator m until the always-insert switch at
    p = ceil(s / pstar), after which the denominator is s.
    """
    k, s, m_max = _check_ks(k, s, m_max)
    pstar = check_unit_interval(pstar, "pstar", closed_right=True)
    p = math.ceil(s / pstar)
    return _kernels.theory_reservoir(k, s, p, m_max)


def evaluate_X_bsbf_direct(k: int, s: int, m: int) -> float:
    """X_m by the explicit sum-product form (quadratic cost, capped).

    Sums, over every iteration l at which a probe bit could last have been
    set, the probability it was set then and survived all later deletions.
    Agrees with :func:`iterate_X_bsbf` and exists to cross-check it.
    """
    k, s, m = _check_ks(k, s, m)
    if m > DIRECT_FORM_CAP:
        raise ValueError(f"direct evaluation capped at m <= {DIRECT_FORM_CAP}")
    return float(_kernels.theory_uniform_deletion_direct(k, s, m)[m - 1])


def rsbf_closed_form_fpr(universe_size: int, m: int, k: int, s: int) -> float:
    """Closed-form false-positive rate of the reservoir filter (no floor).

    Valid asymptotically in m; for small m (k*s > m) the bracketed factor
    can leave [0, 1], in which case the raw value is still returned and
    callers decide how to present it.
    """
    universe_size = check_positive_int(universe_size, "universe_size")
    k = check_positive_int(k, "k")
    s = check_positive_int(s, "s")
    m = check_positive_int(m, "m")
    y = ((universe_size - 1) / universe_size) ** m
    bracket = 1.0 - k * s / m + ((1.0 - 1.0 / math.e) * s / m) ** k
    return y * bracket


def k_formula(fpr_threshold: float) -> float:
    """Partition count at which a full reservoir filter meets the target
    false-positive rate: ln(FPR_t) / ln(1 - 1/e)."""
    fpr_threshold = check_unit_interval(fpr_threshold, "fpr_threshold")
    return math.log(fpr_threshold) / math.log(1.0 - 1.0 / math.e)


def choose_k(fpr_threshold: float) -> int:
    """Partition count actually used: the false-positive formula favours
    large k, false negatives favour k=1, so take the rounded midpoint."""
    return max(1, round((1.0 + k_formula(fpr_threshold)) / 2.0))
