import re

import numpy as np
import pytest

from ecgtriage.wfdb_io import make_record

_ACCEPTANCE: dict[str, tuple[str, str]] = {}
_ACCEPTANCE_PATTERN = re.compile(r"test_acceptance\.py::test_(a\d+)_(\w+)")


def pytest_runtest_logreport(report):
    match = _ACCEPTANCE_PATTERN.search(report.nodeid)
    if not match:
        return
    key, label = match.group(1).upper(), match.group(2).replace("_", " ")
    if report.when == "call":
        _ACCEPTANCE[key] = (label, "PASS" if report.passed else "FAIL")
    elif report.when == "setup" and not report.passed:
        _ACCEPTANCE[key] = (label, "SKIP" if report.skipped else "FAIL")


def pytest_terminal_summary(terminalreporter):
    # one printed verdict per acceptance criterion
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k[1:])):
        label, verdict = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} ({label}): {verdict}")


@pytest.fixture
def record_factory():
    """Builds small valid 12-lead records with seeded random samples."""

    def build(name="rec0", n_samples=40, fs=400.0, seed=0, **kwargs):
        rng = np.random.default_rng(seed)
        samples = rng.integers(-400, 400, size=(12, n_samples), dtype=np.int16)
        defaults = dict(age=44, sex="Male", chagas_label=False, source="test")
        defaults.update(kwargs)
        return make_record(name, fs, samples, **defaults)

    return build
