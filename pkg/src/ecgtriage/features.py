"""Per-record feature vectors for the baseline model.

28 features, order fixed: mean then population standard deviation of the
physical-unit signal for each of the 12 leads in canonical order, then
age in years, then a one-hot sex encoding (male, female, unknown). The
fingerprint of this ordering travels with trained models so a model is
never applied to features laid out differently.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import RecordValidationError
from .wfdb_io import (EcgRecord, LEAD_NAMES_12, physical_signal,
                      validate_record)

FEATURE_NAMES: tuple[str, ...] = tuple(
    f"{lead}_{stat}" for lead in LEAD_NAMES_12 for stat in ("mean", "std")
) + ("age", "sex_male", "sex_female", "sex_unknown")

N_FEATURES = len(FEATURE_NAMES)

# Used only when a training set carries no ages at all.
FALLBACK_AGE = 50.0


def feature_fingerprint(names: tuple[str, ...] = FEATURE_NAMES) -> str:
    """Short stable hash of the feature ordering."""
    digest = hashlib.sha256(",".join(names).encode("ascii")).hexdigest()
    return digest[:16]


def extract_features(record: EcgRecord, *, age_default: float) -> np.ndarray:
    """Feature vector for one record; absent age becomes ``age_default``.

    Signal statistics are computed on physical values in mV; std is the
    population (not sample) standard deviation.
    """
    violations = validate_record(record)
    if violations:
        raise RecordValidationError(violations)
    if record.num_leads != 12:
        raise RecordValidationError(
            [f"feature extraction needs 12 leads, got {record.num_leads}"])
    if record.header.num_samples < 1:
        raise RecordValidationError(
            ["cannot extract features from a record with 0 samples"])

    physical = physical_signal(record)
    out = np.empty(N_FEATURES, dtype=np.float64)
    out[0:24:2] = physical.mean(axis=1)
    out[1:24:2] = physical.std(axis=1)
    out[24] = float(age_default) if record.age is None else float(record.age)
    sex = (record.sex or "Unknown").lower()
    out[25] = 1.0 if sex == "male" else 0.0
    out[26] = 1.0 if sex == "female" else 0.0
    out[27] = 1.0 if sex not in ("male", "female") else 0.0
    if not np.all(np.isfinite(out)):
        bad = [FEATURE_NAMES[i] for i in np.flatnonzero(~np.isfinite(out))]
        raise RecordValidationError(
            [f"non-finite feature values for {record.header.record_name}: {bad}"])
    return out


def median_age(ages: list) -> float:
    """Imputation constant from the training set: median of known ages."""
    known = [float(a) for a in ages if a is not None]
    if not known:
        return FALLBACK_AGE
    return float(np.median(known))
