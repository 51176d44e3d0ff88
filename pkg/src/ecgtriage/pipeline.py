"""Record preprocessing and augmentation.

Covers the dataset preparation steps: zero-pad trimming, empty-record
detection, age capping, prevalence-matched oversampling of negatives,
and plan-driven noise/filter/resample augmentation.
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from math import floor

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .errors import ManifestError, PlanError, RecordValidationError
from .manifest import DatasetManifest, ManifestEntry
from .plans import AugmentationPlan, random_small_plan, validate_plan
from .resampling import output_length, resample
from .wfdb_io import EcgRecord, physical_signal, validate_record, with_samples


def is_empty(record: EcgRecord) -> bool:
    """True when the record has no samples left after trimming."""
    return record.header.num_samples == 0


def trim_zero_padding(record: EcgRecord) -> EcgRecord:
    """Drop leading/trailing sample columns where every lead reads zero.

    Zero means the lead's baseline ADC value. Interior zero columns stay.
    An all-zero record trims to zero samples; use :func:`is_empty` to
    detect and exclude it.
    """
    violations = validate_record(record)
    if violations:
        raise RecordValidationError(violations)
    baselines = np.array([s.baseline for s in record.header.signals],
                         dtype=np.int16)
    nonzero = (record.samples != baselines[:, None]).any(axis=0)
    idx = np.flatnonzero(nonzero)
    if idx.size == 0:
        return with_samples(record, record.samples[:, :0])
    first, last = int(idx[0]), int(idx[-1])
    if first == 0 and last == record.header.num_samples - 1:
        return record
    return with_samples(record, record.samples[:, first:last + 1])


def cap_age(record: EcgRecord) -> EcgRecord:
    """Deidentify extreme ages: anything above 89 becomes exactly 90."""
    if record.age is None:
        return record
    if record.age < 0:
        raise RecordValidationError([f"age must be non-negative, got {record.age}"])
    if record.age > 89:
        return replace(record, age=90)
    return record


def _as_fraction(value) -> Fraction:
    """Exact fraction; floats are read as their decimal text (0.02 -> 1/50)."""
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def rebalance_prevalence(manifest: DatasetManifest, target_prevalence,
                         seed: int) -> DatasetManifest:
    """Oversample negatives until prevalence falls to the target.

    Every original entry is kept; positives are never duplicated.
    Duplicates are named ``<origin>_augN``, carry ``origin_id``, and get a
    fresh small augmentation plan. The realized prevalence lands within
    one part in the output count of the target. A target equal to the
    current prevalence is a no-op; a higher target is an error, since
    adding negatives can only dilute the positives.
    """
    if not manifest.entries:
        raise ManifestError("cannot rebalance an empty manifest")
    target = _as_fraction(target_prevalence)
    if not (0 < target < 1):
        raise ManifestError(f"target prevalence must be in (0, 1), got {target}")
    current = manifest.prevalence
    if target > current:
        raise ManifestError(
            f"target prevalence {target} exceeds current {current}; "
            "oversampling negatives can only lower prevalence")
    if target == current:
        return DatasetManifest(entries=list(manifest.entries),
                               source=manifest.source,
                               metadata=dict(manifest.metadata))

    negatives = [e for e in manifest.entries if not e.chagas_label]
    if not negatives:
        raise ManifestError("no negative entries to oversample")
    positives = manifest.positives

    # Nearest output size to P/target; never below the current size.
    new_total = max(manifest.total, floor(Fraction(positives) / target + Fraction(1, 2)))
    extra = new_total - manifest.total

    rng = np.random.default_rng([seed])
    used_ids = {e.record_id for e in manifest.entries}
    counters: dict[str, int] = {}
    new_entries = list(manifest.entries)
    for pick in rng.integers(0, len(negatives), size=extra):
        origin = negatives[int(pick)]
        n = counters.get(origin.record_id, 0) + 1
        new_id = f"{origin.record_id}_aug{n}"
        while new_id in used_ids:
            n += 1
            new_id = f"{origin.record_id}_aug{n}"
        counters[origin.record_id] = n
        used_ids.add(new_id)
        new_entries.append(ManifestEntry(
            record_id=new_id, chagas_label=False,
            origin_id=origin.record_id, plan=random_small_plan(rng)))
    return DatasetManifest(entries=new_entries, source=manifest.source,
                           metadata=dict(manifest.metadata))


def augment_record(record: EcgRecord, plan: AugmentationPlan) -> EcgRecord:
    """Apply a plan's steps in order: noise, then filter, then resample.

    The signal is processed in physical units and re-quantized to int16
    with the original per-lead gain and baseline. Label, demographics,
    and source are untouched.
    """
    violations = validate_plan(plan)
    if violations:
        raise PlanError("; ".join(violations))
    violations = validate_record(record)
    if violations:
        raise RecordValidationError(violations)

    fs = record.fs
    x = physical_signal(record)
    n = x.shape[1]
    rng = np.random.default_rng(plan.seed)

    for step in plan.noise_steps:
        if step.unit == "rms":
            amp = step.amplitude * float(np.sqrt(np.mean(np.square(x)))) if n else 0.0
        else:
            amp = step.amplitude
        if step.kind == "gaussian":
            x = x + rng.normal(0.0, amp, size=x.shape)
        else:
            # Sinusoidal contaminant with an independent phase per lead.
            phases = rng.uniform(0.0, 2.0 * np.pi, size=x.shape[0])
            t = np.arange(n, dtype=np.float64) / fs
            x = x + amp * np.sin(2.0 * np.pi * step.frequency * t + phases[:, None])

    if plan.device_filter is not None and n:
        f = plan.device_filter
        nyquist = fs / 2.0
        if f.high_cut >= nyquist:
            raise PlanError(f"filter high_cut {f.high_cut} Hz must be below "
                            f"the Nyquist rate {nyquist} Hz")
        sos = butter(f.order, [f.low_cut, f.high_cut], btype="bandpass",
                     fs=fs, output="sos")
        padlen = min(3 * (2 * sos.shape[0] + 1), n - 1)
        x = sosfiltfilt(sos, x, axis=1, padlen=padlen)

    new_fs = fs
    if plan.target_fs is not None and plan.target_fs != fs:
        if n < 2:
            raise PlanError(f"cannot resample a {n}-sample record")
        if output_length(n, fs, plan.target_fs) < 2:
            raise PlanError(
                f"resampling {n} samples from {fs} to {plan.target_fs} Hz "
                "would produce fewer than 2 samples")
        x = resample(x, fs, plan.target_fs)
        new_fs = plan.target_fs

    gains = np.array([s.gain for s in record.header.signals], dtype=np.float64)
    baselines = np.array([s.baseline for s in record.header.signals],
                         dtype=np.float64)
    adc = np.rint(x * gains[:, None] + baselines[:, None])
    adc = np.clip(adc, np.iinfo(np.int16).min, np.iinfo(np.int16).max)
    return with_samples(record, adc.astype(np.int16), fs=new_fs)
