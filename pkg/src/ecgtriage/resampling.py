"""Rational-rate resampling with a Kaiser-windowed-sinc polyphase filter.

The prototype lowpass is cut off at 0.45 x min(fs_from, fs_to), which keeps
tones below 0.4 x min(fs_from, fs_to) within 1% amplitude and acts as the
anti-alias filter when downsampling. Each polyphase branch is normalized to
unit DC gain, so constant signals pass through exactly.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import floor

import numpy as np

from .kernels import polyphase_apply

# Prototype half-length per unit of max(up, down); 36 sets the Kaiser
# transition band well inside the 0.4..0.5 x min(fs) gap.
_HALF_FACTOR = 36
_KAISER_BETA = 8.6
_MAX_RATIO_DENOMINATOR = 10_000


def rational_ratio(fs_from: float, fs_to: float) -> tuple[int, int]:
    """Reduced (up, down) integers approximating fs_to / fs_from."""
    ratio = Fraction(fs_to) / Fraction(fs_from)
    ratio = ratio.limit_denominator(_MAX_RATIO_DENOMINATOR)
    return ratio.numerator, ratio.denominator


@lru_cache(maxsize=64)
def polyphase_bank(up: int, down: int) -> tuple[np.ndarray, int]:
    """(phase bank, center tap) for a given reduced rate ratio.

    The bank has shape ``(up, n_taps)``; branch ``p`` holds the prototype
    taps ``h[p::up]`` (zero-padded), each row normalized to sum 1.
    """
    worst = max(up, down)
    half = _HALF_FACTOR * worst
    cutoff = 0.45 / worst              # cycles/sample at the upsampled rate
    k = np.arange(-half, half + 1, dtype=np.float64)
    proto = 2.0 * cutoff * np.sinc(2.0 * cutoff * k)
    proto *= np.kaiser(2 * half + 1, _KAISER_BETA)

    n_taps = (2 * half) // up + 1
    phases = np.zeros((up, n_taps), dtype=np.float64)
    for p in range(up):
        branch = proto[p::up]
        phases[p, :branch.shape[0]] = branch
        phases[p] /= phases[p].sum()
    return phases, half


def output_length(n: int, fs_from: float, fs_to: float) -> int:
    """round(n * fs_to / fs_from), half away from zero."""
    return int(floor(n * fs_to / fs_from + 0.5))


def resample(samples: np.ndarray, fs_from: float, fs_to: float) -> np.ndarray:
    """Resample to a new rate, preserving duration to within one sample.

    Accepts a 1-D signal or a 2-D (leads, samples) array; returns float64.
    Raises ``ValueError`` for non-positive rates or fewer than 2 samples.
    """
    if not (fs_from > 0 and fs_to > 0):
        raise ValueError(f"sampling rates must be positive, got {fs_from} -> {fs_to}")
    x = np.asarray(samples, dtype=np.float64)
    if x.shape[-1] < 2:
        raise ValueError(f"need at least 2 samples to resample, got {x.shape[-1]}")

    if x.ndim == 2:
        return np.stack([resample(row, fs_from, fs_to) for row in x])
    if x.ndim != 1:
        raise ValueError(f"samples must be 1-D or 2-D, got {x.ndim}-D")

    up, down = rational_ratio(fs_from, fs_to)
    if up == down:
        return x.copy()
    n_out = output_length(x.shape[0], fs_from, fs_to)
    phases, center = polyphase_bank(up, down)
    return polyphase_apply(x, phases, up, down, center, n_out)
