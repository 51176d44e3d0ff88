import numpy as np
import pytest

from ecgtriage.errors import PlanError
from ecgtriage.plans import (AugmentationPlan, DeviceFilter, NoiseStep,
                             format_plan, parse_plan, random_small_plan,
                             validate_plan)


def test_empty_plan_is_valid_and_round_trips():
    plan = AugmentationPlan()
    assert validate_plan(plan) == []
    assert parse_plan(format_plan(plan)) == plan


def test_full_plan_round_trips():
    plan = AugmentationPlan(
        noise_steps=(NoiseStep("gaussian", 0.03, "rms"),
                     NoiseStep("baseline_wander", 0.1, "mV", frequency=0.4),
                     NoiseStep("powerline", 0.02, "mV", frequency=60.0)),
        device_filter=DeviceFilter(low_cut=0.5, high_cut=40.0, order=3),
        target_fs=500.0,
        seed=123456789,
    )
    text = format_plan(plan)
    assert parse_plan(text) == plan
    # one line, stable under a second round trip
    assert "\n" not in text
    assert format_plan(parse_plan(text)) == text


def test_gaussian_step_rejects_frequency():
    plan = AugmentationPlan(noise_steps=(NoiseStep("gaussian", 0.1, "mV",
                                                   frequency=1.0),))
    assert validate_plan(plan)


def test_powerline_frequency_domain():
    ok = AugmentationPlan(noise_steps=(NoiseStep("powerline", 0.1, "mV",
                                                 frequency=50.0),))
    assert validate_plan(ok) == []
    bad = AugmentationPlan(noise_steps=(NoiseStep("powerline", 0.1, "mV",
                                                  frequency=55.0),))
    assert validate_plan(bad)


def test_negative_amplitude_rejected():
    plan = AugmentationPlan(noise_steps=(NoiseStep("gaussian", -0.1, "mV"),))
    assert any("amplitude" in v for v in validate_plan(plan))


def test_filter_band_must_be_ordered():
    plan = AugmentationPlan(device_filter=DeviceFilter(low_cut=50.0, high_cut=1.0))
    assert validate_plan(plan)


def test_parse_rejects_unknown_clause():
    with pytest.raises(PlanError):
        parse_plan("sparkle amount=2")


def test_parse_rejects_bad_number():
    with pytest.raises(PlanError):
        parse_plan("noise gaussian amplitude=lotsmV")


def test_random_small_plans_are_valid():
    rng = np.random.default_rng(3)
    for _ in range(200):
        plan = random_small_plan(rng)
        assert validate_plan(plan) == [], plan
        assert parse_plan(format_plan(plan)) == plan
