"""Deterministic synthetic ECG datasets with a plantable class effect.

Records are not physiologically faithful; they are built for
controllable statistics. Each lead carries a periodic synthetic beat
(five Gaussian bumps per cycle, zero mean over a full cycle), a
per-record amplitude scale, a per-lead Gaussian DC offset, and
band-limited noise whose DC component is exactly zero. Positives
additionally get a bump planted just after the QRS complex on leads
V1-V3 and an upward age shift.

Because noise and beat cycles contribute (almost) nothing to a lead's
record mean, the V1 mean feature is approximately Gaussian across
records, centered at the planted shift for positives. ``effect_size``
is calibrated so one unit moves that feature by about one standard
deviation of its null distribution, and :func:`planted_separability`
estimates the resulting single-feature AUROC by Monte-Carlo simulation
of the exact same law.

All randomness per record comes from a generator seeded by
(seed, 1, record index), so parallel generation cannot change results.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor, sqrt, pi
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .manifest import DatasetManifest, ManifestEntry, write_manifest
from .metric import ScoredCohort, ScoredRow, auroc
from .wfdb_io import EcgRecord, make_record, validate_record, write_record

MANIFEST_NAME = "manifest.csv"

# Beat template: (phase center, phase width, amplitude in mV) per bump,
# roughly P, Q, R, S, T shapes.
_BUMPS = ((0.18, 0.025, 0.12),
          (0.355, 0.008, -0.12),
          (0.375, 0.012, 1.10),
          (0.395, 0.008, -0.25),
          (0.62, 0.045, 0.35))
# Mean of the bump sum over one full cycle, subtracted so the template
# is zero-mean and lead means stay centered at the DC offset.
_TEMPLATE_CYCLE_MEAN = sum(a * w * sqrt(2.0 * pi) for _, w, a in _BUMPS)

PLANTED_CENTER = 0.40
PLANTED_WIDTH = 0.03
PLANTED_LEADS = (6, 7, 8)  # V1, V2, V3

OFFSET_SD_MV = 0.02
NOISE_RMS_MV = 0.05
NOISE_MAX_HZ = 30.0
ADC_GAIN = 1000.0

# Bump amplitude per unit effect size: a bump of amplitude A and width w
# shifts the record mean by A*w*sqrt(2*pi), so this makes one unit of
# effect_size move the mean feature by one OFFSET_SD_MV.
EFFECT_UNIT_MV = OFFSET_SD_MV / (PLANTED_WIDTH * sqrt(2.0 * pi))

AGE_SHIFT_YEARS = 10.0

_LEAD_SCALE = np.array([0.6, 0.8, 0.5, 0.7, 0.5, 0.6,
                        0.9, 1.1, 1.0, 0.9, 0.8, 0.7])


@dataclass(frozen=True)
class SynthConfig:
    n_records: int = 1000
    prevalence: float = 0.05
    fs: float = 400.0
    duration: float = 10.0
    effect_size: float = 0.0
    age_mean: float = 55.0
    age_sd: float = 15.0
    sex_weights: tuple[float, float, float] = (0.48, 0.48, 0.04)  # M, F, unknown
    seed: int = 0


def validate_config(config: SynthConfig) -> list[str]:
    violations = []
    if config.n_records < 1:
        violations.append(f"n_records must be >= 1, got {config.n_records}")
    if not (0 <= config.prevalence <= 1):
        violations.append(f"prevalence must be in [0, 1], got {config.prevalence}")
    if config.fs <= 0:
        violations.append(f"fs must be positive, got {config.fs}")
    if config.duration <= 0:
        violations.append(f"duration must be positive, got {config.duration}")
    elif round(config.duration * config.fs) < 2:
        violations.append(
            f"duration {config.duration}s at {config.fs} Hz gives fewer than 2 samples")
    if config.effect_size < 0:
        violations.append(f"effect_size must be >= 0, got {config.effect_size}")
    if config.age_sd < 0:
        violations.append(f"age_sd must be >= 0, got {config.age_sd}")
    if any(w < 0 for w in config.sex_weights) or sum(config.sex_weights) <= 0:
        violations.append(f"bad sex weights {config.sex_weights}")
    return violations


def positive_count(config: SynthConfig) -> int:
    """round(n * prevalence), half away from zero, exact."""
    return floor(Fraction(str(config.prevalence)) * config.n_records + Fraction(1, 2))


def _template(phase: np.ndarray) -> np.ndarray:
    """Zero-mean beat waveform sampled at the given cycle phases."""
    out = np.full(phase.shape, -_TEMPLATE_CYCLE_MEAN)
    for center, width, amp in _BUMPS:
        out += amp * np.exp(-0.5 * ((phase - center) / width) ** 2)
    return out


def _planted_bump(phase: np.ndarray, effect_size: float) -> np.ndarray:
    amp = effect_size * EFFECT_UNIT_MV
    return amp * np.exp(-0.5 * ((phase - PLANTED_CENTER) / PLANTED_WIDTH) ** 2)


def _band_limited_noise(rng: np.random.Generator, n: int, fs: float) -> np.ndarray:
    """Noise with power below NOISE_MAX_HZ, RMS NOISE_RMS_MV, exact zero DC."""
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    band = (freqs > 0) & (freqs <= NOISE_MAX_HZ)
    coeffs = np.zeros(freqs.shape, dtype=np.complex128)
    k = int(band.sum())
    if k == 0:
        return np.zeros(n)
    coeffs[band] = rng.normal(size=k) + 1j * rng.normal(size=k)
    x = np.fft.irfft(coeffs, n)
    rms = sqrt(float(np.mean(np.square(x))))
    return x * (NOISE_RMS_MV / rms) if rms > 0 else x


def generate_record(config: SynthConfig, index: int, positive: bool) -> EcgRecord:
    """One synthetic 12-lead record; all randomness from (seed, 1, index).

    Draw order is fixed: heart rate, beat phase, record scale, per-lead
    offsets, per-lead noise, age, sex.
    """
    rng = np.random.default_rng([config.seed, 1, index])
    n = int(round(config.duration * config.fs))
    t = np.arange(n, dtype=np.float64) / config.fs

    heart_rate = rng.uniform(60.0, 100.0)
    phase0 = rng.uniform(0.0, 1.0)
    record_scale = rng.uniform(0.8, 1.2)
    offsets = rng.normal(0.0, OFFSET_SD_MV, size=12)

    phase = (t * (heart_rate / 60.0) + phase0) % 1.0
    beat = _template(phase)
    signal = (_LEAD_SCALE[:, None] * record_scale) * beat[None, :] + offsets[:, None]
    for lead in range(12):
        signal[lead] += _band_limited_noise(rng, n, config.fs)
    if positive and config.effect_size > 0:
        bump = _planted_bump(phase, config.effect_size)
        for lead in PLANTED_LEADS:
            signal[lead] += bump

    shift = AGE_SHIFT_YEARS * min(config.effect_size, 1.0) if positive else 0.0
    age = int(np.clip(round(rng.normal(config.age_mean + shift, config.age_sd)),
                      18, 90))
    weights = np.asarray(config.sex_weights, dtype=np.float64)
    sex = str(rng.choice(["Male", "Female", "Unknown"], p=weights / weights.sum()))

    adc = np.clip(np.rint(signal * ADC_GAIN),
                  np.iinfo(np.int16).min, np.iinfo(np.int16).max).astype(np.int16)
    return make_record(f"rec{index:05d}", config.fs, adc, gain=ADC_GAIN,
                       age=age, sex=sex, chagas_label=positive,
                       source="synthetic")


def generate_dataset(config: SynthConfig, out_dir) -> DatasetManifest:
    """Write n_records records plus a ground-truth manifest to out_dir.

    Exactly round(n * prevalence) records are positive; which ones is a
    seeded shuffle. Rerunning with one seed reproduces every byte.
    """
    violations = validate_config(config)
    if violations:
        raise ConfigError("; ".join(violations))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    n_pos = positive_count(config)
    labels = np.zeros(config.n_records, dtype=bool)
    order = np.random.default_rng([config.seed, 0]).permutation(config.n_records)
    labels[order[:n_pos]] = True

    entries = []
    for i in range(config.n_records):
        record = generate_record(config, i, bool(labels[i]))
        problems = validate_record(record)
        if problems:
            raise ConfigError(f"generated record {i} is invalid: {problems}")
        write_record(record, out_dir)
        entries.append(ManifestEntry(record_id=record.header.record_name,
                                     chagas_label=bool(labels[i])))

    manifest = DatasetManifest(
        entries=entries, source="synthetic",
        metadata={
            "generator": "synth-v1",
            "n_records": str(config.n_records),
            "target_prevalence": str(config.prevalence),
            "fs": repr(float(config.fs)),
            "duration": repr(float(config.duration)),
            "effect_size": repr(float(config.effect_size)),
            "seed": str(config.seed),
        })
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


def planted_separability(config: SynthConfig, n_sims: int = 10_000) -> float:
    """Monte-Carlo AUROC of the single planted feature (the V1 record mean).

    Simulates the V1 mean under the generator's own law, half the draws
    with the planted effect and half without, and ranks them. Used to
    calibrate how separable a given effect_size is before training
    anything.
    """
    violations = validate_config(config)
    if violations:
        raise ConfigError("; ".join(violations))
    rng = np.random.default_rng([config.seed, 4])
    n = int(round(config.duration * config.fs))
    t = np.arange(n, dtype=np.float64) / config.fs
    v1 = PLANTED_LEADS[0]

    half = n_sims // 2
    total = 2 * half
    features = np.empty(total, dtype=np.float64)
    labels = np.zeros(total, dtype=bool)
    labels[half:] = True

    chunk = 256
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        heart_rate = rng.uniform(60.0, 100.0, size=count)
        phase0 = rng.uniform(0.0, 1.0, size=count)
        record_scale = rng.uniform(0.8, 1.2, size=count)
        offsets = rng.normal(0.0, OFFSET_SD_MV, size=count)
        phase = (t[None, :] * (heart_rate[:, None] / 60.0) + phase0[:, None]) % 1.0
        beat_mean = _template(phase).mean(axis=1)
        value = offsets + _LEAD_SCALE[v1] * record_scale * beat_mean
        pos = labels[start:start + count]
        if config.effect_size > 0 and pos.any():
            bump_mean = _planted_bump(phase, config.effect_size).mean(axis=1)
            value = value + np.where(pos, bump_mean, 0.0)
        features[start:start + count] = value

    cohort = ScoredCohort(tuple(
        ScoredRow(f"sim{i}", bool(labels[i]), float(features[i]))
        for i in range(total)))
    return auroc(cohort)
