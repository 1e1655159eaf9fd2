#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the two hot paths (log Phi evaluation and the Case V
objective/gradient/Hessian) plus the end-to-end MAP solve that dominates
batch scoring. Run after building the extension:

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from pairscale import PreferenceMatrix, SolverConfig, kernels, solve_map


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def random_preference(rng, n):
    m = np.full((n, n), 0.5)
    for i in range(n):
        for j in range(i + 1, n):
            p = rng.uniform(0.02, 0.98)
            m[j, i] = p
            m[i, j] = 1 - p
    return PreferenceMatrix(m)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    x_large = rng.uniform(-30, 30, size=1_000_000)
    q6 = rng.normal(size=6)
    m6 = random_preference(rng, 6).values
    matrices = [random_preference(rng, 6) for _ in range(200)]
    config = SolverConfig()

    rows = []
    for name in kernels.available_backends():
        with kernels.use_backend(name):
            t_log = timeit(lambda: kernels.log_ndtr(x_large), args.repeat)
            t_sys = timeit(
                lambda: [kernels.case_v_system(m6, q6, 1.0) for _ in range(1000)],
                args.repeat,
            )
            t_solve = timeit(
                lambda: [solve_map(m, config) for m in matrices], args.repeat
            )
        rows.append((name, t_log, t_sys / 1000, len(matrices) / t_solve))

    print(f"{'backend':>8}  {'log_ndtr 1e6 (ms)':>18}  {'case_v n=6 (us)':>16}  {'solves/s n=6':>13}")
    for name, t_log, t_sys, solve_rate in rows:
        print(f"{name:>8}  {t_log * 1e3:>18.2f}  {t_sys * 1e6:>16.2f}  {solve_rate:>13.0f}")
    if len(rows) == 2:
        by_name = {r[0]: r for r in rows}
        if "native" in by_name and "numpy" in by_name:
            log_speedup = by_name["numpy"][1] / by_name["native"][1]
            sys_speedup = by_name["numpy"][2] / by_name["native"][2]
            solve_speedup = by_name["native"][3] / by_name["numpy"][3]
            print(
                f"\nnative speedup: log_ndtr x{log_speedup:.1f}, "
                f"case_v x{sys_speedup:.1f}, solve x{solve_speedup:.1f}"
            )


if __name__ == "__main__":
    main()
