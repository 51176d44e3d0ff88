import math

import numpy as np
import pytest

from ecgtriage.errors import ConfigError
from ecgtriage.manifest import read_manifest
from ecgtriage.synth import (SynthConfig, generate_dataset, generate_record,
                             planted_separability, positive_count,
                             validate_config)
from ecgtriage.wfdb_io import validate_record

SMALL = SynthConfig(n_records=40, prevalence=0.25, fs=300.0, duration=2.0,
                    effect_size=0.0, seed=13)


def test_config_validation():
    assert validate_config(SMALL) == []
    assert validate_config(SynthConfig(n_records=0))
    assert validate_config(SynthConfig(prevalence=1.2))
    assert validate_config(SynthConfig(effect_size=-1.0))


def test_positive_count_is_exact():
    assert positive_count(SynthConfig(n_records=1000, prevalence=0.05)) == 50
    assert positive_count(SynthConfig(n_records=5000, prevalence=0.02)) == 100
    # round half up
    assert positive_count(SynthConfig(n_records=7, prevalence=0.5)) == 4
    # 0.29 * 100 is 28.999... in floats; the exact answer is 29
    assert positive_count(SynthConfig(n_records=100, prevalence=0.29)) == 29


def test_generate_record_is_deterministic():
    one = generate_record(SMALL, 3, True)
    two = generate_record(SMALL, 3, True)
    assert one == two
    assert generate_record(SMALL, 4, True) != one


def test_generated_records_are_valid():
    for index in range(6):
        record = generate_record(SMALL, index, index % 2 == 0)
        assert validate_record(record) == []
        assert record.samples.shape == (12, 600)
        assert 18 <= record.age <= 90
        assert record.sex in ("Male", "Female", "Unknown")
        assert record.source == "synthetic"


def test_label_stored_in_record():
    assert generate_record(SMALL, 0, True).chagas_label is True
    assert generate_record(SMALL, 0, False).chagas_label is False


def test_dataset_generation_byte_identical(tmp_path):
    generate_dataset(SMALL, tmp_path / "a")
    generate_dataset(SMALL, tmp_path / "b")
    files_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    files_b = sorted(p.name for p in (tmp_path / "b").iterdir())
    assert files_a == files_b
    assert len(files_a) == 2 * SMALL.n_records + 1   # hea + dat + manifest
    for name in files_a:
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name).read_bytes()


def test_dataset_manifest_counts(tmp_path):
    manifest = generate_dataset(SMALL, tmp_path / "d")
    assert manifest.total == 40
    assert manifest.positives == 10
    back = read_manifest(tmp_path / "d" / "manifest.csv")
    assert back.entries == manifest.entries
    assert back.metadata["seed"] == "13"


def test_dataset_labels_match_headers(tmp_path):
    from ecgtriage.wfdb_io import read_record
    manifest = generate_dataset(SMALL, tmp_path / "d")
    for entry in manifest.entries[:8]:
        record = read_record(tmp_path / "d" / f"{entry.record_id}.hea")
        assert record.chagas_label == entry.chagas_label


def test_seed_changes_dataset(tmp_path):
    one = generate_dataset(SMALL, tmp_path / "a")
    other_config = SynthConfig(**{**SMALL.__dict__, "seed": 14})
    two = generate_dataset(other_config, tmp_path / "b")
    assert [e.chagas_label for e in one.entries] != [
        e.chagas_label for e in two.entries]


def test_generate_rejects_bad_config(tmp_path):
    with pytest.raises(ConfigError):
        generate_dataset(SynthConfig(n_records=0), tmp_path / "x")


def test_null_effect_gives_chance_separability():
    config = SynthConfig(n_records=1000, prevalence=0.5, effect_size=0.0,
                         seed=5)
    value = planted_separability(config, n_sims=20000)
    assert abs(value - 0.5) < 0.02


def test_separability_follows_normal_law():
    """Planted amplitude is calibrated so one unit of effect size is about
    one standard deviation of the summary feature; two equal-variance
    normals a distance d apart have AUROC Phi(d/sqrt(2))."""
    for effect, tolerance in ((1.2, 0.02), (2.0, 0.02)):
        config = SynthConfig(n_records=1000, prevalence=0.5,
                             effect_size=effect, seed=5)
        got = planted_separability(config, n_sims=20000)
        want = 0.5 * (1.0 + math.erf(effect / math.sqrt(2.0) / math.sqrt(2.0)))
        assert abs(got - want) < tolerance, (effect, got, want)


def test_separability_is_monotone_in_effect():
    values = [planted_separability(
        SynthConfig(n_records=500, prevalence=0.5, effect_size=e, seed=9),
        n_sims=8000) for e in (0.0, 1.0, 2.0, 4.0)]
    assert values == sorted(values)
    assert values[-1] > 0.99


def test_strong_effect_exceeds_acceptance_threshold():
    config = SynthConfig(n_records=100, prevalence=0.5, effect_size=3.0, seed=1)
    assert planted_separability(config, n_sims=20000) >= 0.95


def test_positive_records_shift_mean_of_planted_leads():
    config = SynthConfig(n_records=10, prevalence=0.5, fs=400.0, duration=10.0,
                         effect_size=4.0, seed=2)
    # same index: identical noise draws, so the difference is the bump
    pos = generate_record(config, 0, True)
    neg = generate_record(config, 0, False)
    diff = (pos.samples.astype(np.int64) - neg.samples.astype(np.int64))
    assert np.abs(diff[6:9]).sum() > 0        # V1..V3 carry the bump
    np.testing.assert_array_equal(diff[:6], 0)
    np.testing.assert_array_equal(diff[9:], 0)
