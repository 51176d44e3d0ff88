# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the two hot kernels (see _reference.py for the
documented contracts). Numerics match the reference implementation: same
formulas, same scan order, same tie handling."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def polyphase_apply(x, phases, long up, long down, long center, long n_out):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_arr = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ph = np.ascontiguousarray(phases, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out
    if n_out <= 0:
        return np.zeros(0, dtype=np.float64)
    out = np.empty(n_out, dtype=np.float64)

    cdef long n_in = x_arr.shape[0]
    cdef long n_taps = ph.shape[1]
    cdef long j, a, p, q, t, idx
    cdef double acc

    if n_in == 0:
        out[:] = 0.0
        return out

    for j in range(n_out):
        a = j * down + center
        p = a % up
        q = a // up
        acc = 0.0
        for t in range(n_taps):
            idx = q - t
            if idx < 0:
                idx = 0
            elif idx >= n_in:
                idx = n_in - 1
            acc += ph[p, t] * x_arr[idx]
        out[j] = acc
    return out


def gini_best_split(values, labels, long min_leaf):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] y = np.ascontiguousarray(labels, dtype=np.int64)
    cdef long n = v.shape[0]
    if n < 2 * min_leaf:
        return np.inf, 0.0, False

    cdef long i, total_pos = 0
    for i in range(n):
        total_pos += y[i]

    cdef double best_score = np.inf
    cdef long best_pos = -1
    cdef double l_pos = 0.0, l_neg, r_pos, r_neg, score
    cdef double fi, fn = n

    for i in range(1, n):
        l_pos += y[i - 1]
        if v[i] <= v[i - 1]:
            continue
        if i < min_leaf or n - i < min_leaf:
            continue
        fi = i
        l_neg = fi - l_pos
        r_pos = total_pos - l_pos
        r_neg = (fn - fi) - r_pos
        score = l_pos * l_neg / fi + r_pos * r_neg / (fn - fi)
        if score < best_score:
            best_score = score
            best_pos = i

    if best_pos < 0:
        return np.inf, 0.0, False
    cdef double lo = v[best_pos - 1]
    cdef double hi = v[best_pos]
    cdef double threshold = (lo + hi) / 2.0
    if threshold >= hi:
        threshold = lo
    return best_score, threshold, True
