"""Pure-numpy implementations of the two hot kernels.

Selected automatically when the compiled extension is unavailable (or when
``ECGTRIAGE_FORCE_PYTHON=1``). Both backends implement the same contracts;
see ``kernels.py`` for the dispatch.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def polyphase_apply(x: np.ndarray, phases: np.ndarray, up: int, down: int,
                    center: int, n_out: int) -> np.ndarray:
    """Rational-rate FIR resampling with a precomputed polyphase bank.

    Output sample ``j`` taps the input at positions ``q - t`` where
    ``a = j*down + center``, ``q = a // up``, phase ``p = a % up`` and
    ``t`` runs over the taps of branch ``p``. Input indices are clamped to
    the ends (edge replication), which together with per-branch DC
    normalization keeps constants exactly constant.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    phases = np.ascontiguousarray(phases, dtype=np.float64)
    n_in = x.shape[0]
    n_taps = phases.shape[1]
    if n_out <= 0:
        return np.zeros(0, dtype=np.float64)
    if n_in == 0:
        return np.zeros(n_out, dtype=np.float64)

    j = np.arange(n_out, dtype=np.int64)
    a = j * down + center
    p = a % up
    q = a // up

    # Gather windows x[q - n_taps + 1 .. q] from an edge-padded copy so the
    # clamped reads become plain slices.
    pad = n_taps + 1
    right_pad = max(pad, int(q[-1]) - n_in + 2)
    x_ext = np.concatenate([
        np.full(pad, x[0]),
        x,
        np.full(right_pad, x[-1]),
    ])
    windows = np.lib.stride_tricks.sliding_window_view(x_ext, n_taps)

    y = np.empty(n_out, dtype=np.float64)
    start = q - n_taps + 1 + pad
    for phase in range(up):
        sel = np.nonzero(p == phase)[0]
        if sel.size == 0:
            continue
        # windows are ascending in input index; branch taps index backwards
        y[sel] = windows[start[sel]] @ phases[phase, ::-1]
    return y


def gini_best_split(values: np.ndarray, labels: np.ndarray,
                    min_leaf: int) -> tuple[float, float, bool]:
    """Best binary split of a node by Gini impurity.

    ``values`` must be sorted ascending with ``labels`` (0/1) in the same
    order. Returns ``(score, threshold, found)`` where ``score`` is the
    minimized ``l_pos*l_neg/n_left + r_pos*r_neg/n_right`` (an affine
    transform of the weighted child Gini, so the argmin is the same
    split). Candidate thresholds are midpoints between consecutive
    distinct values; ties in score keep the lowest threshold. Splits
    leaving a child below ``min_leaf`` rows are not considered.
    """
    n = values.shape[0]
    if n < 2 * min_leaf:
        return np.inf, 0.0, False

    pos_cum = np.cumsum(labels, dtype=np.float64)
    total_pos = pos_cum[-1]

    i = np.arange(1, n, dtype=np.float64)          # rows in the left child
    l_pos = pos_cum[:-1]
    l_neg = i - l_pos
    r_pos = total_pos - l_pos
    r_neg = (n - i) - r_pos
    score = l_pos * l_neg / i + r_pos * r_neg / (n - i)

    valid = (values[1:] > values[:-1]) & (i >= min_leaf) & ((n - i) >= min_leaf)
    if not valid.any():
        return np.inf, 0.0, False
    score = np.where(valid, score, np.inf)
    best = int(np.argmin(score))                   # first occurrence = lowest threshold
    lo, hi = values[best], values[best + 1]
    threshold = (lo + hi) / 2.0
    if threshold >= hi:                            # adjacent floats: keep "x <= thr" exact
        threshold = lo
    return float(score[best]), float(threshold), True
