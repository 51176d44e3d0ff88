import subprocess
import sys

import numpy as np
import pytest

from ecgtriage import _reference, kernels
from ecgtriage.resampling import polyphase_bank

speedups = pytest.importorskip("ecgtriage._speedups",
                               reason="compiled backend not built")


def test_gini_backends_bit_identical():
    rng = np.random.default_rng(42)
    for _ in range(300):
        n = int(rng.integers(2, 200))
        values = np.sort(rng.normal(size=n))
        if rng.random() < 0.4:
            values = np.round(values, 1)  # force duplicate candidates
        labels = (rng.random(n) < rng.uniform(0.1, 0.9)).astype(np.float64)
        min_leaf = int(rng.integers(1, 6))
        ref = _reference.gini_best_split(values, labels, min_leaf)
        fast = speedups.gini_best_split(values, labels, min_leaf)
        assert ref == fast, (values, labels, min_leaf)


def test_polyphase_backends_agree():
    rng = np.random.default_rng(7)
    x = rng.normal(size=3001)
    for up, down in [(2, 1), (5, 4), (3, 5), (5, 2), (10, 3)]:
        phases, center = polyphase_bank(up, down)
        n_out = int(np.floor(x.shape[0] * up / down + 0.5))
        ref = _reference.polyphase_apply(x, phases, up, down, center, n_out)
        fast = speedups.polyphase_apply(x, phases, up, down, center, n_out)
        assert np.max(np.abs(ref - fast)) < 1e-12


def test_dispatcher_exports_match_reference():
    assert kernels.BACKEND in ("compiled", "python")
    assert callable(kernels.polyphase_apply)
    assert callable(kernels.gini_best_split)


def test_force_python_env_var_selects_fallback():
    code = ("import os; os.environ['ECGTRIAGE_FORCE_PYTHON'] = '1'; "
            "from ecgtriage import kernels; print(kernels.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
