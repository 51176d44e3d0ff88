"""Compare the compiled kernels against the pure-Python fallback.

Runs both backends on identical inputs, reports wall-clock timings and
the largest numeric deviation between them. Usage:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ecgtriage import _reference
from ecgtriage.resampling import polyphase_bank

try:
    from ecgtriage import _speedups
except ImportError:
    _speedups = None


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_polyphase(repeats: int) -> None:
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(12, 4000))
    up, down = 5, 4
    phases, center = polyphase_bank(up, down)
    n_out = int(np.floor(samples.shape[1] * up / down + 0.5))

    def run(mod):
        return np.stack([mod.polyphase_apply(row, phases, up, down, center, n_out)
                         for row in samples])

    ref = run(_reference)
    t_ref = _time(lambda: run(_reference), repeats)
    print(f"polyphase  python    {t_ref * 1e3:8.2f} ms")
    if _speedups is not None:
        fast = run(_speedups)
        t_fast = _time(lambda: run(_speedups), repeats)
        dev = float(np.max(np.abs(ref - fast)))
        print(f"polyphase  compiled  {t_fast * 1e3:8.2f} ms  "
              f"speedup {t_ref / t_fast:5.1f}x  max deviation {dev:.3e}")


def bench_gini(repeats: int) -> None:
    rng = np.random.default_rng(1)
    n = 20000
    values = np.sort(rng.normal(size=n))
    labels = (rng.random(n) < 0.3).astype(np.float64)

    def run(mod):
        return mod.gini_best_split(values, labels, 5)

    ref = run(_reference)
    t_ref = _time(lambda: run(_reference), repeats)
    print(f"gini       python    {t_ref * 1e3:8.2f} ms")
    if _speedups is not None:
        fast = run(_speedups)
        t_fast = _time(lambda: run(_speedups), repeats)
        same = (ref[0] == fast[0]) and (ref[1] == fast[1]) and (ref[2] == fast[2])
        print(f"gini       compiled  {t_fast * 1e3:8.2f} ms  "
              f"speedup {t_ref / t_fast:5.1f}x  bit-identical: {same}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if _speedups is None:
        print("compiled backend unavailable; timing the fallback only")
    bench_polyphase(args.repeats)
    bench_gini(args.repeats)


if __name__ == "__main__":
    main()
