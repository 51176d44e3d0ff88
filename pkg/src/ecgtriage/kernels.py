"""Backend selection for the hot kernels.

The compiled extension (``ecgtriage._speedups``, built from Cython) is
preferred; a pure-numpy fallback with identical contracts ships alongside.
Set ``ECGTRIAGE_FORCE_PYTHON=1`` to force the fallback, e.g. to compare
the two backends (see ``benchmarks/bench_kernels.py``).

Both backends are deterministic. The Gini split kernel is bit-identical
across backends; the polyphase kernel may differ in the last float bit
because the fallback sums taps in BLAS order.
"""

from __future__ import annotations

import os

from . import _reference

if os.environ.get("ECGTRIAGE_FORCE_PYTHON", "") not in ("", "0"):
    _impl = _reference
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _reference

BACKEND = _impl.BACKEND_NAME
polyphase_apply = _impl.polyphase_apply
gini_best_split = _impl.gini_best_split


def using_compiled() -> bool:
    return BACKEND == "compiled"
