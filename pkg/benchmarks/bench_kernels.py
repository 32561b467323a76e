#!/usr/bin/env python3
"""Compare the compiled kernel extension against the numpy fallback.

Times the two hot per-iteration kernels (TV prox sweep and the median
window) on solver-sized images and checks that both backends agree.

Usage: python benchmarks/bench_kernels.py [--m 75] [--n 180] [--reps 5]
"""

import argparse
import time

import numpy as np

from rsmrecon import _kernels_py

try:
    from rsmrecon import _kernels
except ImportError:
    _kernels = None


def timeit(fn, reps):
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=75)
    ap.add_argument("--n", type=int, default=180)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    img = rng.normal(size=(args.m, args.n)) * 10

    cases = [
        ("tv_prox (50 sweeps)",
         lambda mod: mod.tv_prox(img, 0.5, max_iter=50, tol=0.0)),
        ("median_filter r=1", lambda mod: mod.median_filter(img, 1)),
        ("median_filter r=2", lambda mod: mod.median_filter(img, 2)),
    ]
    print(f"image {args.m}x{args.n}, median of {args.reps} reps")
    for name, call in cases:
        t_py = timeit(lambda: call(_kernels_py), args.reps)
        line = f"{name:22s} python {1000*t_py:8.2f} ms"
        if _kernels is not None:
            t_cy = timeit(lambda: call(_kernels), args.reps)
            diff = np.max(np.abs(call(_kernels) - call(_kernels_py)))
            line += f"   cython {1000*t_cy:8.2f} ms   " \
                    f"speedup {t_py/t_cy:5.2f}x   max|diff| {diff:.2e}"
        else:
            line += "   (compiled extension not available)"
        print(line)


if __name__ == "__main__":
    main()
