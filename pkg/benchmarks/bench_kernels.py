#!/usr/bin/env python3
"""Benchmark the numba and numpy distance-kernel backends against each other.

Usage:
    python benchmarks/bench_kernels.py [--points N] [--samples M] [--repeats R]

Times three kernels on a synthetic corpus of located patents: exact pairwise
mean (O(n^2)), sampled pairwise mean, and the batched elementwise distance
used for reference distances. The numba numbers exclude JIT compilation
(one warmup call per kernel).
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from patkb import _kernels
from patkb.geo import _located_radians, sample_pair_indices
from patkb.synth import GeneratorConfig, generate_synthetic


def _time(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=2000,
                        help="located patents for the pairwise kernels")
    parser.add_argument("--samples", type=int, default=1_000_000,
                        help="sampled pairs")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    corpus = generate_synthetic(
        GeneratorConfig(n_records=int(args.points / 0.9) + 10, located_rate=0.9),
        seed=args.seed)
    lat, lon = _located_radians(list(corpus))
    lat, lon = lat[:args.points], lon[:args.points]
    n = lat.shape[0]
    idx_a, idx_b = sample_pair_indices(n, args.samples, seed=args.seed)

    print(f"points={n} pairs={n * (n - 1) // 2} samples={args.samples} "
          f"repeats={args.repeats}")
    print(f"backends available: {', '.join(sorted(_kernels.BACKENDS))}")
    print(f"{'kernel':<18}{'backend':<10}{'best (s)':>12}{'speedup':>10}")

    cases = {
        "pairwise_stats": lambda b: b.pairwise_stats(lat, lon),
        "sampled_stats": lambda b: b.sampled_stats(lat, lon, idx_a, idx_b),
        "haversine_many": lambda b: b.haversine_many(
            lat[idx_a], lon[idx_a], lat[idx_b], lon[idx_b]),
    }
    for name, call in cases.items():
        timings: dict[str, float] = {}
        for backend_name in sorted(_kernels.BACKENDS):
            backend = _kernels.BACKENDS[backend_name]
            call(backend)  # warmup (and JIT compile for numba)
            timings[backend_name] = _time(lambda: call(backend), args.repeats)
        base = timings.get("numpy", math.nan)
        for backend_name, seconds in sorted(timings.items()):
            speedup = base / seconds if seconds > 0 else math.inf
            print(f"{name:<18}{backend_name:<10}{seconds:>12.4f}"
                  f"{speedup:>9.1f}x")

    # sanity: backends must agree
    if len(_kernels.BACKENDS) == 2:
        m_np, s_np, _ = _kernels.BACKENDS["numpy"].pairwise_stats(lat, lon)
        m_nb, s_nb, _ = _kernels.BACKENDS["numba"].pairwise_stats(lat, lon)
        rel = abs(m_np - m_nb) / m_np
        print(f"pairwise mean agreement: numpy={m_np:.6f} numba={m_nb:.6f} "
              f"rel diff={rel:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
