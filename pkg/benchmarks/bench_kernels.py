#!/usr/bin/env python3
"""Benchmark the compiled Cython kernels against the pure-numpy fallback.

Times the three hot paths: single RHS evaluation (the integrator callback),
batched accelerations (trajectory caching), and a complete fundamental-domain
shooting integration through each kernel implementation.

Usage: python3 benchmarks/bench_kernels.py
"""

import time
import timeit

import numpy as np

from figure_eight import _kernels_py, kernels, loops, action, refine
from figure_eight.dynamics import NEWTONIAN, IntegrateOptions, integrate


def bench_rhs(impl, n=20000):
    y = np.array([0.97, 0.0, -0.97, 0.0, 0.0, 0.0,
                  0.0, 0.4, 0.0, 0.4, 0.0, -0.8])
    return timeit.timeit(lambda: impl.rhs(0.0, y, -1.0), number=n) / n


def bench_accel_batch(impl, n=200):
    rng = np.random.default_rng(0)
    pos = rng.normal(size=(2048, 6))
    return timeit.timeit(lambda: impl.accel_batch(pos, -1.0), number=n) / n


def bench_integration(impl):
    """Full shooting integration with the kernel swapped in."""
    saved = (kernels.rhs, kernels.min_pair_distance)
    kernels.rhs = impl.rhs
    kernels.min_pair_distance = impl.min_pair_distance
    try:
        result = action.minimize(loops.seed_eight(12.0, 0.3), NEWTONIAN)
        unknowns = refine.extract_unknowns(result.loop)
        state = unknowns.state(12.0)
        t0 = time.perf_counter()
        reps = 5
        for _ in range(reps):
            integrate(state, NEWTONIAN, 0.0,
                      IntegrateOptions(tol=1e-13, atol=1e-14, n_samples=257))
        return (time.perf_counter() - t0) / reps
    finally:
        kernels.rhs, kernels.min_pair_distance = saved


def main():
    rows = []
    impls = [("python", _kernels_py)]
    if kernels.using_compiled():
        from figure_eight import _kernels
        impls.insert(0, ("cython", _kernels))
    else:
        print("note: compiled extension not available; timing the fallback only")

    for name, impl in impls:
        rows.append((name,
                     bench_rhs(impl) * 1e6,
                     bench_accel_batch(impl) * 1e3,
                     bench_integration(impl) * 1e3))

    print(f"{'kernel':<8} {'rhs eval (us)':>14} {'batch 2048 (ms)':>16} "
          f"{'shoot integ (ms)':>17}")
    for name, rhs_us, batch_ms, integ_ms in rows:
        print(f"{name:<8} {rhs_us:>14.2f} {batch_ms:>16.3f} {integ_ms:>17.2f}")
    if len(rows) == 2:
        print(f"\nspeedup (cython vs python): rhs {rows[1][1] / rows[0][1]:.1f}x, "
              f"batch {rows[1][2] / rows[0][2]:.1f}x, "
              f"integration {rows[1][3] / rows[0][3]:.1f}x")


if __name__ == "__main__":
    main()
