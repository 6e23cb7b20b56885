#!/usr/bin/env python3
"""Benchmark the compiled permutation kernel against the numpy fallback.

Run from the repository root after building the extension:

    python setup.py build_ext --inplace
    PYTHONPATH=src python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from spearperm import _pykernels, average_ranks
from spearperm.hypotests import permutation_bits

try:
    from spearperm import _ckernels
except ImportError:
    _ckernels = None

SHAPES = [
    (10, 1000),
    (20, 1000),
    (50, 1000),
    (100, 1000),
    (200, 1000),
    (300, 20000),
]


def make_inputs(n, num):
    rng = np.random.default_rng(n)
    a = average_ranks(rng.normal(size=n)).ranks
    b = average_ranks(rng.normal(size=n)).ranks
    adev = a - a.mean()
    bdev = b - b.mean()
    bits = permutation_bits(seed=n, num=num, n=n)
    return adev, bdev, bits


def best_of(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    if _ckernels is None:
        print("compiled kernel not built; benchmarking fallback only")
    header = f"{'n':>5} {'B':>7} {'python ms':>10} {'c ms':>10} {'speedup':>8}  identical"
    print(header)
    print("-" * len(header))
    for n, num in SHAPES:
        adev, bdev, bits = make_inputs(n, num)
        py_t = best_of(lambda: _pykernels.permute_stats(adev, bdev, bits, True))
        if _ckernels is None:
            print(f"{n:>5} {num:>7} {py_t * 1e3:>10.2f} {'-':>10} {'-':>8}")
            continue
        c_t = best_of(lambda: _ckernels.permute_stats(adev, bdev, bits, True))
        same = np.array_equal(
            _pykernels.permute_stats(adev, bdev, bits, True),
            _ckernels.permute_stats(adev, bdev, bits, True),
        )
        print(
            f"{n:>5} {num:>7} {py_t * 1e3:>10.2f} {c_t * 1e3:>10.2f} "
            f"{py_t / c_t:>7.1f}x  {same}"
        )


if __name__ == "__main__":
    main()
