"""JIT-compiled inner loops shared by the filters, the bit array and the
analytical recurrences.

Everything here operates on plain numpy arrays so that a whole stream chunk
is processed in one call; the wrapper classes own the arrays and stay in
charge of validation. All randomness is a splitmix64 counter advanced in
place through a one-element uint64 array, which keeps single-element and
chunked processing bit-for-bit identical.

Random-draw order is part of the contract (it is what makes matched-seed
runs comparable across algorithms):

* uniform-deletion filter: one position draw per partition, partition 0..k-1;
* single-deletion filter: one draw over ``[0, k*s)`` decomposed into
  (partition, position), so at ``k=1`` it consumes exactly the draw the
  uniform-deletion filter consumes;
* load-balanced filter: per partition, one position draw then one unit draw,
  both always consumed;
* reservoir filter: one unit draw for the insertion coin, then on insertion
  one position draw per partition; in the always-insert phase, set-bit
  sampling draws positions until it hits a set bit (rejection), falling back
  to a wrap-around scan from one extra draw after ``4*s // max(load, 1)``
  misses.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

U64 = np.uint64

_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX_A = U64(0xBF58476D1CE4E5B9)
_MIX_B = U64(0x94D049BB133111EB)
_INV_2_53 = 1.1102230246251565e-16  # 2**-53


@njit(uint64(uint64), cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX_A
    z = (z ^ (z >> U64(27))) * _MIX_B
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def rng_next(state):
    state[0] = state[0] + _GOLDEN
    return mix64(state[0])


@njit(cache=True, inline="always")
def rng_index(state, n):
    # Modulo bias is O(n / 2**64): immaterial for any feasible n.
    return np.int64(rng_next(state) % U64(n))


@njit(cache=True, inline="always")
def rng_unit(state):
    return np.float64(rng_next(state) >> U64(11)) * _INV_2_53


@njit(cache=True, inline="always")
def bit_get(words, part, pos):
    return np.int64((words[part, pos >> 6] >> U64(pos & 63)) & U64(1))


@njit(cache=True, inline="always")
def bit_set(words, load, part, pos):
    w = pos >> 6
    m = U64(1) << U64(pos & 63)
    if words[part, w] & m:
        return False
    words[part, w] |= m
    load[part] += 1
    return True


@njit(cache=True, inline="always")
def bit_clear(words, load, part, pos):
    w = pos >> 6
    m = U64(1) << U64(pos & 63)
    if words[part, w] & m:
        words[part, w] &= ~m
        load[part] -= 1
        return True
    return False


@njit(cache=True)
def sample_set_position(words, load, part, s, state):
    """Uniform position among the set bits of one partition (load must be >= 1).

    Rejection sampling is exact and needs ~s/load draws; the scan fallback
    bounds the worst case at the price of negligible bias on that path.
    """
    budget = np.int64(4) * s // max(load[part], np.int64(1))
    for _ in range(budget):
        pos = rng_index(state, s)
        if bit_get(words, part, pos):
            return pos
    start = rng_index(state, s)
    for off in range(s):
        pos = start + off
        if pos >= s:
            pos -= s
        if bit_get(words, part, pos):
            return pos
    return np.int64(-1)  # unreachable when load >= 1


@njit(cache=True, inline="always")
def _fill_positions(g1, g2, k, s, out):
    g2o = g2 | U64(1)
    for i in range(k):
        out[i] = np.int64((g1 + U64(i) * g2o) % U64(s))


@njit(cache=True, inline="always")
def _all_set(words, h, k):
    for i in range(k):
        if not bit_get(words, i, h[i]):
            return False
    return True


@njit(cache=True)
def probe_chunk(words, g1, g2, s, out):
    """Verdicts for a chunk without mutating anything (1 = all probe bits set)."""
    k = words.shape[0]
    h = np.empty(k, np.int64)
    for t in range(g1.shape[0]):
        _fill_positions(g1[t], g2[t], k, s, h)
        out[t] = 1 if _all_set(words, h, k) else 0


@njit(cache=True)
def run_stdbf(words, load, g1, g2, s, verdicts, loads_out):
    k = words.shape[0]
    h = np.empty(k, np.int64)
    for t in range(g1.shape[0]):
        _fill_positions(g1[t], g2[t], k, s, h)
        verdicts[t] = 1 if _all_set(words, h, k) else 0
        for i in range(k):
            bit_set(words, load, i, h[i])
        loads_out[t] = load.sum()


@njit(cache=True)
def run_bsbf(words, load, state, g1, g2, s, verdicts, loads_out):
    k = words.shape[0]
    h = np.empty(k, np.int64)
    for t in range(g1.shape[0]):
        _fill_positions(g1[t], g2[t], k, s, h)
        dup = _all_set(words, h, k)
        verdicts[t] = 1 if dup else 0
        if not dup:
            # delete first so an element can never evict its own fresh bits
            for i in range(k):
                bit_clear(words, load, i, rng_index(state, s))
            for i in range(k):
                bit_set(words, load, i, h[i])
        loads_out[t] = load.sum()


@njit(cache=True)
def run_bsbfsd(words, load, state, g1, g2, s, verdicts, loads_out):
    k = words.shape[0]
    h = np.empty(k, np.int64)
    for t in range(g1.shape[0]):
        _fill_positions(g1[t], g2[t], k, s, h)
        dup = _all_set(words, h, k)
        verdicts[t] = 1 if dup else 0
        if not dup:
            j = rng_index(state, k * s)
            bit_clear(words, load, j // s, j % s)
            for i in range(k):
                bit_set(words, load, i, h[i])
        loads_out[t] = load.sum()


@njit(cache=True)
def run_rlbsbf(words, load, state, g1, g2, s, verdicts, loads_out):
    k = words.shape[0]
    h = np.empty(k, np.int64)
    for t in range(g1.shape[0]):
        _fill_positions(g1[t], g2[t], k, s, h)
        dup = _all_set(words, h, k)
        verdicts[t] = 1 if dup else 0
        if not dup:
            for i in range(k):
                pos = rng_index(state, s)
                p_del = load[i] / s  # load read before this partition mutates
                if rng_unit(state) < p_del:
                    bit_clear(words, load, i, pos)
            for i in range(k):
                bit_set(words, load, i, h[i])
        loads_out[t] = load.sum()


@njit(cache=True)
def run_rsbf(words, load, state, iteration, g1, g2, s, p, verdicts, loads_out):
    """Reservoir-sampled filter.

    Three regimes keyed off the 1-based stream position ``it``:
    fill (it <= s) inserts everything with no deletions; the reservoir
    regime (s < it < p) inserts reported-distinct elements with probability
    s/it and pairs every insertion with one uniform reset per partition;
    past ``p`` every reported-distinct element is inserted by resetting one
    currently-set bit per touched partition, which conserves that
    partition's load.
    """
    k = words.shape[0]
    h = np.empty(k, np.int64)
    for t in range(g1.shape[0]):
        it = iteration[0] + 1
        _fill_positions(g1[t], g2[t], k, s, h)
        dup = _all_set(words, h, k)
        verdicts[t] = 1 if dup else 0
        if it <= s:
            for i in range(k):
                bit_set(words, load, i, h[i])
        elif not dup:
            if it >= p:
                for i in range(k):
                    if not bit_get(words, i, h[i]):
                        if load[i] > 0:
                            pos = sample_set_position(words, load, i, s, state)
                            bit_clear(words, load, i, pos)
                        bit_set(words, load, i, h[i])
            elif rng_unit(state) < s / it:
                for i in range(k):
                    bit_set(words, load, i, h[i])
                for i in range(k):
                    bit_clear(words, load, i, rng_index(state, s))
        iteration[0] = it
        loads_out[t] = load.sum()


@njit(cache=True)
def probe_sbf_chunk(cells, g1, g2, n_probes, out):
    n_cells = cells.shape[0]
    for t in range(g1.shape[0]):
        g2o = g2[t] | U64(1)
        allset = True
        for i in range(n_probes):
            pos = np.int64((g1[t] + U64(i) * g2o) % U64(n_cells))
            if cells[pos] == 0:
                allset = False
                break
        out[t] = 1 if allset else 0


@njit(cache=True)
def run_sbf(cells, state, g1, g2, n_probes, n_decrements, max_value,
            nonzero, verdicts, loads_out):
    """Stable-Bloom comparator: every arrival decays random cells then
    refreshes the probed cells to the counter ceiling."""
    n_cells = cells.shape[0]
    h = np.empty(n_probes, np.int64)
    for t in range(g1.shape[0]):
        g2o = g2[t] | U64(1)
        allset = True
        for i in range(n_probes):
            pos = np.int64((g1[t] + U64(i) * g2o) % U64(n_cells))
            h[i] = pos
            if cells[pos] == 0:
                allset = False
        verdicts[t] = 1 if allset else 0
        for _ in range(n_decrements):
            c = rng_index(state, n_cells)
            if cells[c] > 0:
                cells[c] -= 1
                if cells[c] == 0:
                    nonzero[0] -= 1
        for i in range(n_probes):
            if cells[h[i]] == 0:
                nonzero[0] += 1
            cells[h[i]] = max_value
        loads_out[t] = nonzero[0]


# ---------------------------------------------------------------------------
# analytical recurrences
#
# Each sequence is iterated on u = X**(1/k); substituting u makes every step
# "u plus a non-negative increment", so the iterate is non-decreasing in
# floating point exactly, not just in exact arithmetic. The X array is
# recovered as u**k at the end and clamped to [0, 1].
# ---------------------------------------------------------------------------


@njit(cache=True)
def theory_uniform_deletion(k, s, m_max):
    X = np.zeros(m_max)
    inv_s = 1.0 / s
    u = 0.0
    for m in range(1, m_max):
        uk = u ** k
        u = u + (1.0 - uk) * (1.0 - u) * inv_s
        if u > 1.0:
            u = 1.0
        X[m] = u ** k
    return X


@njit(cache=True)
def theory_single_deletion(k, s, m_max):
    X = np.zeros(m_max)
    inv_s = 1.0 / s
    u = 0.0
    for m in range(1, m_max):
        uk = u ** k
        u = u + (1.0 - uk) * inv_s * (1.0 - u / k)
        if u > 1.0:
            u = 1.0
        X[m] = u ** k
    return X


@njit(cache=True)
def theory_load_balanced(k, s, load_traj, m_max):
    X = np.zeros(m_max)
    inv_s = 1.0 / s
    inv_s2 = 1.0 / (s * s)
    u = 0.0
    for m in range(1, m_max):
        uk = u ** k
        u = u + (1.0 - uk) * (inv_s - u * load_traj[m] * inv_s2)
        if u > 1.0:
            u = 1.0
        X[m] = u ** k
    return X


@njit(cache=True)
def theory_reservoir(k, s, p, m_max):
    X = np.zeros(m_max)
    inv_s = 1.0 / s
    u = 0.0
    for m in range(1, m_max):
        if m <= s:
            u = 1.0 - (1.0 - inv_s) ** m
        else:
            denom = np.float64(m) if m <= p else np.float64(s)
            uk = u ** k
            u = u + (1.0 - uk) * (1.0 - u) / denom
        if u > 1.0:
            u = 1.0
        X[m] = u ** k
    return X


@njit(cache=True)
def theory_uniform_deletion_direct(k, s, m_max):
    """O(m^2) evaluation of the explicit sum-over-last-set-iteration form."""
    X = np.zeros(m_max)
    inv_s = 1.0 / s
    for m in range(1, m_max):
        acc = 0.0
        prod = 1.0
        for l in range(m, 0, -1):
            xl = X[l - 1]
            acc += (1.0 - xl) * inv_s * prod
            prod *= xl + (1.0 - xl) * (1.0 - inv_s)
        v = acc ** k
        X[m] = v if v < 1.0 else 1.0
    return X
