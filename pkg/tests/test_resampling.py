import math
from fractions import Fraction

import numpy as np
import pytest

from ecgtriage.resampling import output_length, rational_ratio, resample

RATES = (300.0, 400.0, 500.0, 600.0, 1000.0)


def tone(fs: float, freq: float, seconds: float = 4.0) -> np.ndarray:
    t = np.arange(int(round(fs * seconds))) / fs
    return np.sin(2.0 * math.pi * freq * t)


def measured_amplitude(x: np.ndarray) -> float:
    # central half only, away from edge transients
    n = x.shape[0]
    core = x[n // 4: 3 * n // 4]
    return float(np.sqrt(2.0) * np.sqrt(np.mean(core * core)))


def test_rational_ratio_examples():
    assert rational_ratio(400.0, 500.0) == (5, 4)
    assert rational_ratio(1000.0, 300.0) == (3, 10)
    assert rational_ratio(500.0, 500.0) == (1, 1)


def test_output_length_rounds_half_up():
    assert output_length(4000, 400.0, 500.0) == 5000
    assert output_length(4000, 1000.0, 300.0) == 1200
    assert output_length(3, 300.0, 400.0) == 4


@pytest.mark.parametrize("fs_from", RATES)
@pytest.mark.parametrize("fs_to", RATES)
def test_sine_amplitude_preserved(fs_from, fs_to):
    """In-band tones keep their amplitude to better than 1%."""
    passband = 0.35 * min(fs_from, fs_to) / 2.0
    for freq in (5.0, 17.3, passband):
        x = tone(fs_from, freq)
        y = resample(x, fs_from, fs_to)
        assert y.shape[0] == output_length(x.shape[0], fs_from, fs_to)
        error = abs(measured_amplitude(y) - 1.0)
        assert error < 0.01, (fs_from, fs_to, freq, error)


@pytest.mark.parametrize("fs_from,fs_to", [(400.0, 500.0), (1000.0, 300.0),
                                           (300.0, 600.0)])
def test_dc_preserved_exactly(fs_from, fs_to):
    x = np.full(2000, 0.75)
    y = resample(x, fs_from, fs_to)
    assert np.max(np.abs(y - 0.75)) < 1e-12


def test_identity_rate_is_a_copy():
    x = np.arange(10.0)
    y = resample(x, 400.0, 400.0)
    np.testing.assert_array_equal(x, y)
    assert y is not x


def test_two_dimensional_input_resampled_per_row():
    x = np.stack([tone(400.0, 5.0), tone(400.0, 11.0)])
    y = resample(x, 400.0, 500.0)
    assert y.shape == (2, output_length(x.shape[1], 400.0, 500.0))
    np.testing.assert_allclose(y[0], resample(x[0], 400.0, 500.0))


def test_downsampling_rejects_out_of_band_energy():
    # a 180 Hz tone cannot survive a move to fs=300 (Nyquist 150)
    x = tone(400.0, 180.0)
    y = resample(x, 400.0, 300.0)
    assert measured_amplitude(y) < 0.05


def test_too_short_input_rejected():
    with pytest.raises(ValueError):
        resample(np.array([1.0]), 400.0, 500.0)


def test_invalid_rates_rejected():
    with pytest.raises(ValueError):
        resample(np.zeros(10), 0.0, 500.0)
    with pytest.raises(ValueError):
        resample(np.zeros(10), 400.0, -1.0)


def test_round_trip_is_close():
    x = tone(400.0, 12.0)
    back = resample(resample(x, 400.0, 1000.0), 1000.0, 400.0)
    core = slice(400, 1200)
    assert np.max(np.abs(back[core] - x[core])) < 0.01


def test_ratio_uses_exact_fraction():
    up, down = rational_ratio(300.0, 1000.0)
    assert Fraction(up, down) == Fraction(10, 3)
