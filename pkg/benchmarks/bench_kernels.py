"""Compiled vs pure-Python ``eset_level_codes``.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times both backends on the families the code-set map sees in practice
(1 to 3 subsets of {0..4}, levels 0..6) and checks they agree.
"""

import argparse
import itertools
import time

from ceorbit import kernels

MASKS = range(32)


def workload(n):
    for family in itertools.islice(itertools.product(MASKS, repeat=n), 0, None, 7):
        for k in range(7):
            yield k, [m & ((1 << k) - 1) for m in family]


def bench(fn, n, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        for k, masks in workload(n):
            fn(k, masks)
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled is None:
        print("compiled kernel not built; only the pure backend is available")
        return
    for n in (1, 2, 3):
        for k, masks in workload(n):
            assert kernels.compiled.eset_level_codes(k, masks) == \
                kernels.py.eset_level_codes(k, masks), (k, masks)
        tc = bench(kernels.compiled.eset_level_codes, n, args.repeat)
        tp = bench(kernels.py.eset_level_codes, n, args.repeat)
        print(f"n={n}: compiled {tc:.3f}s  pure {tp:.3f}s  speedup {tp / tc:.1f}x")


if __name__ == "__main__":
    main()
