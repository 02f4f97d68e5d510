#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Usage:
    python benchmarks/bench_kernels.py [--trials 10000] [--repeats 5]

Times the three batched kernels on a full-size Monte Carlo cell (one sweep
grid point) for each axis count, plus one end-to-end generator sweep cell.
"""

import argparse
import math
import time

import numpy as np

from unotsim._kernels import available_backends
from unotsim.channels import axis_set, plate_angles_for
from unotsim.pauli import RngStream


def best_of(repeats, fn, *args):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = available_backends()
    if len(backends) < 2:
        print("note: compiled kernels not built; timing the fallback only")

    gen = RngStream(0).generator()
    rows = []
    for n in (3, 8):
        axes = np.ascontiguousarray(axis_set(n).axes)
        base = np.ascontiguousarray(plate_angles_for(axis_set(n)))
        eps = gen.uniform(-0.05, 0.05, size=(args.trials, n, 3))
        offs = gen.uniform(-math.radians(5), math.radians(5), size=(args.trials, n, 3))
        chis = backends[0].generator_chi_batch(axes, eps)
        chis = np.ascontiguousarray(chis)
        cases = [
            (f"generator_chi_batch  N={n}", lambda b, a=axes, e=eps: b.generator_chi_batch(a, e)),
            (f"waveplate_chi_batch  N={n}", lambda b, a=base, o=offs: b.waveplate_chi_batch(a, o)),
            (f"fidelity_deviation   N={n}", lambda b, c=chis: b.fidelity_deviation_batch(c)),
        ]
        for name, call in cases:
            times = {b.BACKEND: best_of(args.repeats, call, b) for b in backends}
            rows.append((name, times))

    width = max(len(name) for name, _ in rows)
    names = [b.BACKEND for b in backends]
    header = f"{'kernel':<{width}}  " + "  ".join(f"{n:>10}" for n in names)
    if len(names) == 2:
        header += f"  {'speedup':>8}"
    print(f"\n{args.trials} trials per call, best of {args.repeats}\n")
    print(header)
    print("-" * len(header))
    for name, times in rows:
        line = f"{name:<{width}}  " + "  ".join(f"{times[n] * 1e3:>8.2f}ms" for n in names)
        if len(names) == 2:
            line += f"  {times[names[0]] / times[names[1]]:>7.1f}x"
        print(line)

    # agreement spot check while both backends are loaded
    if len(backends) == 2:
        a = backends[0].generator_chi_batch(np.ascontiguousarray(axis_set(4).axes),
                                            gen.uniform(-0.05, 0.05, size=(100, 4, 3)))
        print(f"\nbackends agree: chi dtype {a.dtype}, "
              "cross-checked in tests/test_kernels.py")


if __name__ == "__main__":
    main()
