"""Declarative augmentation plans and their one-line text form.

A plan is a sequence of noise steps, an optional device-style bandpass,
and an optional target sampling rate, plus the seed that makes the noise
reproducible. Text form, clauses joined by ``"; "``:

    noise gaussian amplitude=0.02rms
    noise baseline_wander amplitude=0.1mV frequency=0.3
    noise powerline amplitude=0.01mV frequency=60
    filter low_cut=0.05 high_cut=100 order=2
    resample 500
    seed 42

Amplitudes carry a unit suffix: ``mV`` is absolute, ``rms`` is a fraction
of the signal's pooled RMS at the time the step is applied. Canonical
clause order is noise steps, filter, resample, seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite
from typing import Optional

import numpy as np

from .errors import PlanError

NOISE_KINDS = ("gaussian", "baseline_wander", "powerline")
AMPLITUDE_UNITS = ("mV", "rms")
POWERLINE_FREQS = (50.0, 60.0)
ALLOWED_TARGET_FS = (300.0, 400.0, 500.0, 600.0, 1000.0)
MAX_SEED = 2**64


@dataclass(frozen=True)
class NoiseStep:
    kind: str
    amplitude: float
    unit: str = "mV"
    frequency: Optional[float] = None


@dataclass(frozen=True)
class DeviceFilter:
    """Butterworth-style bandpass run as second-order sections."""

    low_cut: float = 0.05
    high_cut: float = 100.0
    order: int = 2


@dataclass(frozen=True)
class AugmentationPlan:
    noise_steps: tuple[NoiseStep, ...] = field(default_factory=tuple)
    device_filter: Optional[DeviceFilter] = None
    target_fs: Optional[float] = None
    seed: int = 0


def validate_plan(plan: AugmentationPlan) -> list[str]:
    """Check every plan invariant; returns one message per violation."""
    violations = []
    for i, step in enumerate(plan.noise_steps):
        where = f"noise step {i} ({step.kind})"
        if step.kind not in NOISE_KINDS:
            violations.append(f"noise step {i}: unknown kind {step.kind!r}, "
                              f"expected one of {NOISE_KINDS}")
            continue
        if not (isfinite(step.amplitude) and step.amplitude >= 0):
            violations.append(f"{where}: amplitude must be >= 0, got {step.amplitude}")
        if step.unit not in AMPLITUDE_UNITS:
            violations.append(f"{where}: unit must be one of {AMPLITUDE_UNITS}, "
                              f"got {step.unit!r}")
        if step.kind == "gaussian":
            if step.frequency is not None:
                violations.append(f"{where}: gaussian noise takes no frequency")
        elif step.frequency is None:
            violations.append(f"{where}: frequency is required")
        elif not (isfinite(step.frequency) and step.frequency > 0):
            violations.append(f"{where}: frequency must be positive, got {step.frequency}")
        elif step.kind == "powerline" and step.frequency not in POWERLINE_FREQS:
            violations.append(f"{where}: powerline frequency must be one of "
                              f"{POWERLINE_FREQS}, got {step.frequency}")

    f = plan.device_filter
    if f is not None:
        if not (isfinite(f.low_cut) and isfinite(f.high_cut) and 0 <= f.low_cut < f.high_cut):
            violations.append(
                f"filter: need 0 <= low_cut < high_cut, got {f.low_cut}..{f.high_cut}")
        if f.order < 1:
            violations.append(f"filter: order must be >= 1, got {f.order}")

    if plan.target_fs is not None and plan.target_fs not in ALLOWED_TARGET_FS:
        violations.append(f"target_fs must be one of {ALLOWED_TARGET_FS}, "
                          f"got {plan.target_fs}")
    if not (0 <= plan.seed < MAX_SEED):
        violations.append(f"seed must be a 64-bit unsigned integer, got {plan.seed}")
    return violations


def _fmt(x: float) -> str:
    f = float(x)
    if f.is_integer() and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def format_plan(plan: AugmentationPlan) -> str:
    """Render a plan to its canonical one-line text form."""
    clauses = []
    for step in plan.noise_steps:
        clause = f"noise {step.kind} amplitude={_fmt(step.amplitude)}{step.unit}"
        if step.frequency is not None:
            clause += f" frequency={_fmt(step.frequency)}"
        clauses.append(clause)
    if plan.device_filter is not None:
        f = plan.device_filter
        clauses.append(f"filter low_cut={_fmt(f.low_cut)} "
                       f"high_cut={_fmt(f.high_cut)} order={f.order}")
    if plan.target_fs is not None:
        clauses.append(f"resample {_fmt(plan.target_fs)}")
    clauses.append(f"seed {plan.seed}")
    return "; ".join(clauses)


def _parse_pairs(tokens: list[str], clause: str) -> dict[str, str]:
    pairs = {}
    for token in tokens:
        if "=" not in token:
            raise PlanError(f"expected key=value, got {token!r} in clause {clause!r}")
        key, value = token.split("=", 1)
        if key in pairs:
            raise PlanError(f"duplicate key {key!r} in clause {clause!r}")
        pairs[key] = value
    return pairs


def _parse_float(value: str, what: str, clause: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise PlanError(f"{what} {value!r} is not numeric in clause {clause!r}") from None


def parse_plan(text: str) -> AugmentationPlan:
    """Parse the text form; raises PlanError on bad syntax or invariants."""
    noise_steps: list[NoiseStep] = []
    device_filter = None
    target_fs = None
    seed = None

    for raw in text.split(";"):
        clause = raw.strip()
        if not clause:
            continue
        tokens = clause.split()
        directive = tokens[0]

        if directive == "noise":
            if len(tokens) < 2:
                raise PlanError(f"noise clause needs a kind: {clause!r}")
            pairs = _parse_pairs(tokens[2:], clause)
            amp_text = pairs.pop("amplitude", None)
            if amp_text is None:
                raise PlanError(f"noise clause needs amplitude=: {clause!r}")
            unit = next((u for u in AMPLITUDE_UNITS if amp_text.endswith(u)), None)
            if unit is None:
                raise PlanError(f"amplitude {amp_text!r} must end in one of "
                                f"{AMPLITUDE_UNITS} in clause {clause!r}")
            amplitude = _parse_float(amp_text[:-len(unit)], "amplitude", clause)
            freq_text = pairs.pop("frequency", None)
            frequency = (None if freq_text is None
                         else _parse_float(freq_text, "frequency", clause))
            if pairs:
                raise PlanError(f"unknown keys {sorted(pairs)} in clause {clause!r}")
            noise_steps.append(NoiseStep(kind=tokens[1], amplitude=amplitude,
                                         unit=unit, frequency=frequency))

        elif directive == "filter":
            if device_filter is not None:
                raise PlanError("plan has more than one filter clause")
            pairs = _parse_pairs(tokens[1:], clause)
            defaults = DeviceFilter()
            low = _parse_float(pairs.pop("low_cut", _fmt(defaults.low_cut)),
                               "low_cut", clause)
            high = _parse_float(pairs.pop("high_cut", _fmt(defaults.high_cut)),
                                "high_cut", clause)
            order_text = pairs.pop("order", str(defaults.order))
            try:
                order = int(order_text)
            except ValueError:
                raise PlanError(f"order {order_text!r} is not an integer "
                                f"in clause {clause!r}") from None
            if pairs:
                raise PlanError(f"unknown keys {sorted(pairs)} in clause {clause!r}")
            device_filter = DeviceFilter(low_cut=low, high_cut=high, order=order)

        elif directive == "resample":
            if target_fs is not None:
                raise PlanError("plan has more than one resample clause")
            if len(tokens) != 2:
                raise PlanError(f"resample clause takes one rate: {clause!r}")
            target_fs = _parse_float(tokens[1], "target rate", clause)

        elif directive == "seed":
            if seed is not None:
                raise PlanError("plan has more than one seed clause")
            if len(tokens) != 2:
                raise PlanError(f"seed clause takes one integer: {clause!r}")
            try:
                seed = int(tokens[1])
            except ValueError:
                raise PlanError(f"seed {tokens[1]!r} is not an integer") from None

        else:
            raise PlanError(f"unknown directive {directive!r} in clause {clause!r}")

    plan = AugmentationPlan(noise_steps=tuple(noise_steps),
                            device_filter=device_filter,
                            target_fs=target_fs,
                            seed=0 if seed is None else seed)
    violations = validate_plan(plan)
    if violations:
        raise PlanError("; ".join(violations))
    return plan


def random_small_plan(rng: np.random.Generator, *,
                      allow_resample: bool = True) -> AugmentationPlan:
    """Draw a mild plan: light noise, sometimes a filter or rate change.

    Used for oversampling duplicates, which should stay highly similar
    to their origin records.
    """
    steps = [NoiseStep("gaussian", round(float(rng.uniform(0.01, 0.05)), 4), "rms")]
    if rng.random() < 0.5:
        steps.append(NoiseStep("baseline_wander",
                               round(float(rng.uniform(0.02, 0.1)), 4), "mV",
                               round(float(rng.uniform(0.05, 0.5)), 3)))
    if rng.random() < 0.3:
        steps.append(NoiseStep("powerline",
                               round(float(rng.uniform(0.005, 0.02)), 4), "mV",
                               float(rng.choice(POWERLINE_FREQS))))
    device_filter = DeviceFilter() if rng.random() < 0.3 else None
    target_fs = (float(rng.choice(ALLOWED_TARGET_FS))
                 if allow_resample and rng.random() < 0.3 else None)
    return AugmentationPlan(noise_steps=tuple(steps),
                            device_filter=device_filter,
                            target_fs=target_fs,
                            seed=int(rng.integers(0, 2**63)))
