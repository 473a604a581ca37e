#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Run:  python3 benchmarks/kernel_bench.py

Covers the hot kernels behind the identity suites and campaigns: the cyclic
Jacobi eigensolver (single large matrix and a wide small-matrix batch) and the
Walsh-Hadamard transform.
"""

import time

import numpy as np

from quditbh import _kernels_py, kernels
from quditbh.rng import CounterRng


def rand_hermitian_batch(seed, count, dim):
    g = CounterRng(seed).complex_normal(count * dim * dim).reshape(count, dim, dim)
    return 0.5 * (g + np.conj(np.transpose(g, (0, 2, 1))))


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    if not kernels.COMPILED:
        print("note: compiled core not importable; both lanes below are the fallback")
    lanes = [("compiled" if kernels.COMPILED else "active", kernels), ("python", _kernels_py)]

    single = rand_hermitian_batch(1, 1, 64)[0]
    batch = rand_hermitian_batch(2, 4000, 5)
    table = CounterRng(3).complex_normal(1 << 20)

    cases = [
        ("jacobi_eigh 64x64", lambda impl: impl.jacobi_eigh(single)),
        ("jacobi_eigh_batch 4000x5x5", lambda impl: impl.jacobi_eigh_batch(batch)),
        ("fwht 2^20", lambda impl: impl.fwht(table)),
    ]

    print(f"{'kernel':32s} " + " ".join(f"{name:>12s}" for name, _ in lanes) + f" {'speedup':>9s}")
    for label, runner in cases:
        times = []
        for _, impl in lanes:
            times.append(timeit(lambda impl=impl: runner(impl)))
        speedup = times[1] / times[0] if times[0] > 0 else float("inf")
        cells = " ".join(f"{t * 1e3:10.2f}ms" for t in times)
        print(f"{label:32s} {cells} {speedup:8.1f}x")

    # agreement spot checks
    w_a, _ = lanes[0][1].jacobi_eigh(single)
    w_b, _ = lanes[1][1].jacobi_eigh(single)
    print(f"\neigenvalue agreement (max |diff|): {np.max(np.abs(w_a - w_b)):.2e}")
    f_a = lanes[0][1].fwht(table[:4096])
    f_b = lanes[1][1].fwht(table[:4096])
    print(f"fwht agreement (max |diff|):       {np.max(np.abs(f_a - f_b)):.2e}")


if __name__ == "__main__":
    main()
