#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the raw kernels (event-time aggregation, gradient scatter, concordance
pair counting) and the composed objective+gradient under both backends.

    python3 benchmarks/bench_loss.py --sizes 32 128 1024 --repeats 200
"""

import argparse
import time

import numpy as np

from survcluster import LossConfig, concordance_index, total_objective, use_backend
from survcluster import _kernels_numba, _kernels_numpy


def _time(fn, repeats):
    fn()  # warmup (and JIT compilation for the numba backend)
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def make_case(n, k, seed):
    rng = np.random.default_rng(seed)
    times = np.sort(rng.exponential(10.0, n))
    events = rng.random(n) < 0.6
    events[0] = True
    probs = np.ascontiguousarray(rng.dirichlet(np.ones(k), n))
    scores = rng.standard_normal(n)
    event_times = np.unique(times[events])
    g_event = rng.standard_normal(k)
    cum = rng.standard_normal((event_times.size, k))
    return times, events, probs, scores, event_times, g_event, cum


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[32, 128, 1024])
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    cfg = LossConfig(penalty_weight=0.1)
    header = f"{'case':>28} {'numpy us':>12} {'numba us':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in args.sizes:
        times, events, probs, scores, event_times, g_event, cum = make_case(n, args.k, seed=n)

        def kernel_cases(mod):
            return {
                f"aggregate kernel   n={n}": lambda: mod.event_aggregates(times, events, probs),
                f"scatter kernel     n={n}": lambda: mod.scatter_time_gradient(
                    times, events, event_times, g_event, cum
                ),
                f"c-index kernel     n={n}": lambda: mod.concordance_counts(
                    times, events, scores
                ),
            }

        rows = {}
        for mod, label in ((_kernels_numpy, "numpy"), (_kernels_numba, "numba")):
            for name, fn in kernel_cases(mod).items():
                rows.setdefault(name, {})[label] = _time(fn, args.repeats)

        for backend in ("numpy", "numba"):
            use_backend(backend)
            rows.setdefault(f"objective+gradient n={n}", {})[backend] = _time(
                lambda: total_objective(probs, (times, events), cfg), args.repeats
            )
            rows[f"c-index composed   n={n}"] = rows.get(f"c-index composed   n={n}", {})
            rows[f"c-index composed   n={n}"][backend] = _time(
                lambda: concordance_index(scores, (times, events)), args.repeats
            )
        use_backend(None)

        for name, timing in rows.items():
            print(
                f"{name:>28} {timing['numpy'] * 1e6:12.1f} "
                f"{timing['numba'] * 1e6:12.1f} "
                f"{timing['numpy'] / timing['numba']:8.1f}x"
            )


if __name__ == "__main__":
    main()
