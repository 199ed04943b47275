#!/usr/bin/env python3
"""Benchmark: compiled fitting core vs the pure-numpy fallback.

Times the single-point constrained fit on a Monte-Carlo-shaped workload
(the hot loop of the simulation lab) and reports the speedup plus the
worst estimate discrepancy between the two implementations.

Usage: python benchmarks/bench_backends.py [--n 2000] [--fits 3000]
"""

import argparse
import time

import numpy as np

from dekernel import _corepy

try:
    from dekernel import _core

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def workload(n, fits, seed=12345):
    rng = np.random.default_rng(seed)
    x = np.linspace(0.002, 4.0, n)
    g = (1.0 + 0.5 * x) ** 2
    problems = []
    for _ in range(fits):
        z = g + rng.normal(0.0, 0.1, n)
        problems.append(z)
    return x, problems


def run(impl, x, problems, log_scale=False):
    t0 = time.perf_counter()
    out = np.empty(len(problems))
    for i, z in enumerate(problems):
        out[i] = impl.de_fit_point(x, z, 2.0, 0, 0.25, 0.5, 1.0, 2, log_scale)[0]
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000, help="design points per fit")
    ap.add_argument("--fits", type=int, default=3000, help="number of fits")
    args = ap.parse_args()

    x, problems = workload(args.n, args.fits)
    t_py, est_py = run(_corepy, x, problems)
    print(f"pure python : {t_py:.3f} s  ({1e6 * t_py / args.fits:.1f} us/fit)")
    if not HAVE_COMPILED:
        print("compiled core not available (build with pip install -e .)")
        return
    t_c, est_c = run(_core, x, problems)
    print(f"compiled    : {t_c:.3f} s  ({1e6 * t_c / args.fits:.1f} us/fit)")
    print(f"speedup     : x{t_py / t_c:.1f}")
    print(f"max |delta| : {np.max(np.abs(est_c - est_py)):.3e}")


if __name__ == "__main__":
    main()
