from fractions import Fraction

import numpy as np
import pytest

from ecgtriage.errors import ManifestError, PlanError, RecordValidationError
from ecgtriage.manifest import DatasetManifest, ManifestEntry, validate_manifest
from ecgtriage.pipeline import (augment_record, cap_age, is_empty,
                                rebalance_prevalence, trim_zero_padding)
from ecgtriage.plans import AugmentationPlan, DeviceFilter, NoiseStep
from ecgtriage.wfdb_io import make_record, physical_signal


def padded_record(left=3, right=4, n=20, baseline=0):
    rng = np.random.default_rng(0)
    core = rng.integers(50, 300, size=(12, n), dtype=np.int16)
    samples = np.concatenate([
        np.full((12, left), baseline, dtype=np.int16),
        core,
        np.full((12, right), baseline, dtype=np.int16),
    ], axis=1)
    return make_record("pad0", 400.0, samples, baseline=baseline), core


def test_trim_removes_leading_and_trailing_zero_columns():
    record, core = padded_record()
    trimmed = trim_zero_padding(record)
    np.testing.assert_array_equal(trimmed.samples, core)
    assert trimmed.header.num_samples == core.shape[1]


def test_trim_is_baseline_relative():
    # baseline 100 means raw value 100 reads as physical zero
    record, core = padded_record(baseline=100)
    trimmed = trim_zero_padding(record)
    np.testing.assert_array_equal(trimmed.samples, core)


def test_trim_keeps_interior_zeros():
    samples = np.ones((12, 9), dtype=np.int16)
    samples[:, 4] = 0
    record = make_record("pad1", 400.0, samples)
    assert trim_zero_padding(record).header.num_samples == 9


def test_trim_is_idempotent():
    record, _ = padded_record()
    once = trim_zero_padding(record)
    assert trim_zero_padding(once) == once


def test_all_zero_record_trims_to_empty():
    record = make_record("pad2", 400.0, np.zeros((12, 30), dtype=np.int16))
    assert is_empty(trim_zero_padding(record))


def test_cap_age():
    base = np.ones((12, 5), dtype=np.int16)
    assert cap_age(make_record("c1", 400.0, base, age=95)).age == 90
    assert cap_age(make_record("c2", 400.0, base, age=90)).age == 90
    assert cap_age(make_record("c3", 400.0, base, age=89)).age == 89
    assert cap_age(make_record("c4", 400.0, base)).age is None


def test_cap_age_rejects_negative():
    record = make_record("c5", 400.0, np.ones((12, 5), dtype=np.int16), age=-2)
    with pytest.raises(RecordValidationError):
        cap_age(record)


def original_manifest(positives, negatives):
    entries = [ManifestEntry(f"p{i}", True) for i in range(positives)]
    entries += [ManifestEntry(f"n{i}", False) for i in range(negatives)]
    return DatasetManifest(entries=entries, source="unit")


def test_rebalance_reaches_target_exactly_when_divisible():
    # 2 positives at target 2% need exactly 100 records
    manifest = original_manifest(2, 8)
    out = rebalance_prevalence(manifest, Fraction(1, 50), seed=1)
    assert out.total == 100
    assert out.positives == 2
    assert out.prevalence == Fraction(1, 50)
    assert validate_manifest(out) == []


def test_rebalance_noop_at_target():
    manifest = original_manifest(1, 49)
    out = rebalance_prevalence(manifest, Fraction(1, 50), seed=1)
    assert out.total == 50
    assert [e.record_id for e in out.entries] == [e.record_id
                                                  for e in manifest.entries]


def test_rebalance_only_duplicates_negatives():
    manifest = original_manifest(5, 5)
    out = rebalance_prevalence(manifest, Fraction(1, 10), seed=3)
    added = [e for e in out.entries if e.origin_id is not None]
    assert added
    assert all(not e.chagas_label for e in added)
    assert all(e.origin_id.startswith("n") for e in added)
    assert all(e.plan is not None for e in added)


def test_rebalance_is_deterministic():
    manifest = original_manifest(3, 7)
    one = rebalance_prevalence(manifest, Fraction(1, 20), seed=11)
    two = rebalance_prevalence(manifest, Fraction(1, 20), seed=11)
    assert one.entries == two.entries
    three = rebalance_prevalence(manifest, Fraction(1, 20), seed=12)
    assert three.entries != one.entries


def test_rebalance_rejects_upward_target():
    manifest = original_manifest(1, 9)
    with pytest.raises(ManifestError, match="lower"):
        rebalance_prevalence(manifest, Fraction(1, 2), seed=0)


def test_rebalance_decimal_target_is_exact():
    # float 0.02 must behave as 2/100 exactly
    manifest = original_manifest(2, 8)
    out = rebalance_prevalence(manifest, 0.02, seed=5)
    assert out.total == 100
    assert out.prevalence == Fraction(1, 50)


def test_rebalance_large_cohort_analog():
    # 709 of 1419 positive, target 2.05%: all positives kept, realized
    # prevalence lands within one record of target
    manifest = original_manifest(709, 710)
    target = Fraction("0.0205")
    out = rebalance_prevalence(manifest, target, seed=7)
    assert out.positives == 709
    assert abs(709 - target * out.total) <= 1
    assert validate_manifest(out) == []


def test_augment_gaussian_noise_changes_samples_deterministically():
    rng = np.random.default_rng(2)
    samples = rng.integers(-500, 500, size=(12, 400), dtype=np.int16)
    record = make_record("a1", 400.0, samples)
    plan = AugmentationPlan(noise_steps=(NoiseStep("gaussian", 0.05, "mV"),),
                            seed=3)
    one = augment_record(record, plan)
    two = augment_record(record, plan)
    assert one == two
    assert one != record
    other_seed = augment_record(record, AugmentationPlan(
        noise_steps=(NoiseStep("gaussian", 0.05, "mV"),), seed=4))
    assert other_seed != one


def test_augment_noise_amplitude_is_calibrated():
    record = make_record("a2", 400.0, np.zeros((12, 8000), dtype=np.int16))
    plan = AugmentationPlan(noise_steps=(NoiseStep("gaussian", 0.2, "mV"),),
                            seed=1)
    noisy = physical_signal(augment_record(record, plan))
    rms = float(np.sqrt(np.mean(noisy ** 2)))
    assert abs(rms - 0.2) < 0.01


def test_augment_powerline_is_a_pure_tone():
    record = make_record("a3", 400.0, np.zeros((12, 4000), dtype=np.int16))
    plan = AugmentationPlan(noise_steps=(NoiseStep("powerline", 0.5, "mV",
                                                   frequency=50.0),), seed=2)
    out = physical_signal(augment_record(record, plan))
    spectrum = np.abs(np.fft.rfft(out[0]))
    freqs = np.fft.rfftfreq(out.shape[1], d=1.0 / 400.0)
    assert abs(freqs[int(np.argmax(spectrum))] - 50.0) < 0.2


def test_augment_device_filter_removes_dc_and_high_frequency():
    n = 8000
    t = np.arange(n) / 1000.0
    wave = 0.8 + 0.5 * np.sin(2 * np.pi * 10.0 * t) + 0.5 * np.sin(
        2 * np.pi * 180.0 * t)
    samples = np.rint(wave * 1000.0).astype(np.int16)
    record = make_record("a4", 1000.0, np.tile(samples, (12, 1)))
    plan = AugmentationPlan(device_filter=DeviceFilter(low_cut=0.5,
                                                       high_cut=100.0))
    out = physical_signal(augment_record(record, plan))[0]
    spectrum = np.abs(np.fft.rfft(out)) / n
    freqs = np.fft.rfftfreq(n, d=0.001)
    def power_near(f):
        return spectrum[np.argmin(np.abs(freqs - f))]
    assert power_near(10.0) > 0.2                        # passband survives
    assert power_near(180.0) < 0.1 * power_near(10.0)    # stopband attenuated
    assert abs(np.mean(out)) < 0.05                      # dc removed


def test_augment_resample_step_changes_rate():
    record = make_record("a5", 400.0, np.ones((12, 400), dtype=np.int16))
    plan = AugmentationPlan(target_fs=500.0)
    out = augment_record(record, plan)
    assert out.header.fs == 500.0
    assert out.header.num_samples == 500


def test_augment_rejects_filter_above_nyquist():
    record = make_record("a6", 150.0, np.ones((12, 400), dtype=np.int16))
    plan = AugmentationPlan(device_filter=DeviceFilter(low_cut=0.5,
                                                       high_cut=100.0))
    with pytest.raises(PlanError, match="Nyquist"):
        augment_record(record, plan)


def test_augment_preserves_metadata():
    record = make_record("a7", 400.0, np.ones((12, 400), dtype=np.int16),
                         age=70, sex="Female", chagas_label=True, source="unit")
    out = augment_record(record, AugmentationPlan(
        noise_steps=(NoiseStep("gaussian", 0.01, "rms"),), seed=6))
    assert (out.age, out.sex, out.chagas_label, out.source) == (
        70, "Female", True, "unit")
