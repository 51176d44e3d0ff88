import numpy as np
import pytest

from ecgtriage.errors import RecordValidationError
from ecgtriage.features import (FEATURE_NAMES, N_FEATURES, extract_features,
                                feature_fingerprint, median_age)
from ecgtriage.wfdb_io import make_record


def test_layout():
    assert len(FEATURE_NAMES) == N_FEATURES == 28
    assert FEATURE_NAMES[0] == "I_mean"
    assert FEATURE_NAMES[-4:] == ("age", "sex_male", "sex_female", "sex_unknown")


def test_extract_values():
    samples = np.zeros((12, 4), dtype=np.int16)
    samples[0] = [1000, 1000, 3000, 3000]   # mean 2 mV, population std 1 mV
    record = make_record("f0", 400.0, samples, age=62, sex="Female")
    vector = extract_features(record, age_default=50.0)
    assert vector.shape == (28,)
    assert vector[0] == pytest.approx(2.0)
    assert vector[1] == pytest.approx(1.0)
    assert vector[24] == 62.0
    assert tuple(vector[25:28]) == (0.0, 1.0, 0.0)


def test_missing_age_uses_default():
    record = make_record("f1", 400.0, np.ones((12, 5), dtype=np.int16))
    vector = extract_features(record, age_default=47.5)
    assert vector[24] == 47.5
    assert tuple(vector[25:28]) == (0.0, 0.0, 1.0)   # sex unknown


def test_fingerprint_tracks_names():
    assert feature_fingerprint() == feature_fingerprint(FEATURE_NAMES)
    assert feature_fingerprint(("a", "b")) != feature_fingerprint(("b", "a"))
    assert len(feature_fingerprint()) == 16


def test_median_age():
    assert median_age([30, None, 40, 50, None]) == 40.0
    assert median_age([20, 30]) == 25.0
    # all missing falls back to the documented default
    assert median_age([None, None]) == 50.0


def test_rejects_wrong_lead_count():
    record = make_record("f2", 400.0, np.ones((12, 5), dtype=np.int16))
    record.samples = record.samples[:3]
    with pytest.raises(RecordValidationError):
        extract_features(record, age_default=50.0)
