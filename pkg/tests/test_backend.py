from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

import pytest

from mapair import _backend, _kernels_py

try:
    from mapair import _kernels as compiled
except ImportError:  # pragma: no cover - depends on the build
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def random_terms(rng: random.Random, m: int, k: int, n: int, frac: bool = False) -> dict:
    keys = list(combinations(range(1, m + 1), k))
    out = {}
    for key in rng.sample(keys, min(n, len(keys))):
        v = rng.randint(-5, 5)
        out[key] = Fraction(v, rng.randint(1, 3)) if frac else v
    return {k_: v for k_, v in out.items() if v}


def test_backend_selection():
    assert _backend.BACKEND in ("cython", "python")
    if compiled is not None:
        assert _backend.BACKEND == "cython" or _backend.merge_sign is _kernels_py.merge_sign


@needs_compiled
def test_merge_sign_parity():
    rng = random.Random(1)
    for _ in range(300):
        a = tuple(sorted(rng.sample(range(1, 12), rng.randint(0, 5))))
        b = tuple(sorted(rng.sample(range(1, 12), rng.randint(0, 5))))
        assert compiled.merge_sign(a, b) == _kernels_py.merge_sign(a, b)


@needs_compiled
@pytest.mark.parametrize("frac", [False, True])
def test_wedge_terms_parity(frac):
    rng = random.Random(2)
    for _ in range(60):
        a = random_terms(rng, 7, rng.randint(1, 3), 6, frac)
        b = random_terms(rng, 7, rng.randint(1, 3), 6, frac)
        assert compiled.wedge_terms(a, b) == _kernels_py.wedge_terms(a, b)


@needs_compiled
def test_poly_mul_parity():
    rng = random.Random(3)
    for _ in range(60):
        a = {tuple(rng.randint(0, 3) for _ in range(3)): Fraction(rng.randint(-4, 4), rng.randint(1, 3))
             for _ in range(5)}
        b = {tuple(rng.randint(0, 3) for _ in range(3)): rng.randint(-4, 4) for _ in range(5)}
        assert compiled.poly_mul(a, b) == _kernels_py.poly_mul(a, b)


@needs_compiled
def test_plucker_residual_parity():
    rng = random.Random(4)
    for _ in range(80):
        k = rng.randint(2, 3)
        t = random_terms(rng, 6, k, rng.randint(1, 5))
        r1, r2 = compiled.plucker_residual(t, k), _kernels_py.plucker_residual(t, k)
        assert (r1 is None) == (r2 is None)
        if r1 is not None:
            assert r1 == r2


@needs_compiled
def test_sparse_rref_parity():
    rng = random.Random(5)
    for _ in range(40):
        ncols = rng.randint(3, 10)
        rows = []
        for _ in range(rng.randint(1, 8)):
            row = {c: rng.randint(-4, 4) for c in rng.sample(range(ncols), rng.randint(1, ncols))}
            rows.append({c: v for c, v in row.items() if v})
        assert compiled.sparse_rref(rows, ncols) == _kernels_py.sparse_rref(rows, ncols)
