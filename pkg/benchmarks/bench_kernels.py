"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import timeit
from itertools import combinations

from mapair import _kernels_py

try:
    from mapair import _kernels as compiled
except ImportError:
    compiled = None


def random_terms(rng: random.Random, m: int, k: int, n: int) -> dict:
    keys = list(combinations(range(1, m + 1), k))
    return {key: rng.randint(1, 9) for key in rng.sample(keys, min(n, len(keys)))}


def workloads(rng: random.Random) -> dict:
    a, b = random_terms(rng, 10, 3, 60), random_terms(rng, 10, 2, 40)
    pl = random_terms(rng, 8, 4, 40)
    pa = {tuple(rng.randint(0, 4) for _ in range(4)): rng.randint(-9, 9) for _ in range(60)}
    pb = {tuple(rng.randint(0, 4) for _ in range(4)): rng.randint(-9, 9) for _ in range(60)}
    rows = [{c: rng.randint(-9, 9) or 1 for c in rng.sample(range(40), 12)} for _ in range(30)]
    return {
        "wedge_terms": lambda k: k.wedge_terms(a, b),
        "poly_mul": lambda k: k.poly_mul(pa, pb),
        "plucker_residual": lambda k: k.plucker_residual(pl, 4),
        "sparse_rref": lambda k: k.sparse_rref(rows, 40),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args()
    if compiled is None:
        print("compiled kernels not available; timing the fallback only")
    work = workloads(random.Random(0))
    print(f"{'kernel':<18}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in work.items():
        py = min(timeit.repeat(lambda: fn(_kernels_py), repeat=args.repeat, number=args.number)) / args.number
        if compiled is None:
            print(f"{name:<18}{py * 1e3:>12.3f}{'-':>12}{'-':>10}")
            continue
        assert fn(compiled) == fn(_kernels_py), name
        cy = min(timeit.repeat(lambda: fn(compiled), repeat=args.repeat, number=args.number)) / args.number
        print(f"{name:<18}{py * 1e3:>12.3f}{cy * 1e3:>12.3f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
