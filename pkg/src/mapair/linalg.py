"""Exact dense/sparse linear algebra over the rationals.

Matrices are lists of row lists of Fractions.  Elimination is delegated to the
fraction-free sparse kernel after clearing row denominators.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from ._backend import sparse_rref

Matrix = list


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> Matrix:
    return [[Fraction(0)] * c for _ in range(r)]


def to_fraction_matrix(M) -> Matrix:
    return [[Fraction(x) for x in row] for row in M]


def transpose(M: Matrix) -> Matrix:
    return [list(col) for col in zip(*M)] if M else []


def _scaled(M: Matrix):
    """Integer matrix and common denominator with M = ints / den."""
    den = 1
    for row in M:
        for x in row:
            d = getattr(x, "denominator", 1)
            if d != 1:
                den = lcm(den, d)
    if den == 1:
        return [[int(x) for x in row] for row in M], 1
    return [[int(x * den) for x in row] for row in M], den


def matmul(A: Matrix, B: Matrix) -> Matrix:
    """Exact product; entries are combined as integers over one denominator."""
    Ai, da = _scaled(A)
    Bi, db = _scaled(transpose(B))
    den = da * db
    if den == 1:
        return [[Fraction(sum(a * b for a, b in zip(row, col))) for col in Bi] for row in Ai]
    return [[Fraction(sum(a * b for a, b in zip(row, col)), den) for col in Bi] for row in Ai]


def matvec(A: Matrix, v: Sequence) -> list:
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def _int_row(row) -> dict:
    den = 1
    for x in row:
        if x:
            den = lcm(den, Fraction(x).denominator)
    out = {}
    for j, x in enumerate(row):
        if x:
            x = Fraction(x)
            out[j] = x.numerator * (den // x.denominator)
    return out


def sparse_rows_rref(rows: list, ncols: int):
    """Row-reduce sparse rows ``{col: Fraction|int}``; returns (pivots, rows)."""
    int_rows = []
    for r in rows:
        den = 1
        for x in r.values():
            if isinstance(x, Fraction):
                den = lcm(den, x.denominator)
        if den == 1:
            int_rows.append({j: int(x) for j, x in r.items() if x})
        else:
            int_rows.append({j: int(x * den) for j, x in r.items() if x})
    return sparse_rref(int_rows, ncols)


def rref(M: Matrix):
    """Return (pivot columns, reduced integer rows as dicts)."""
    ncols = len(M[0]) if M else 0
    return sparse_rref([_int_row(r) for r in M], ncols)


def rank(M: Matrix) -> int:
    if not M:
        return 0
    return len(rref(M)[0])


def kernel_from_rref(pivots, reduced, ncols: int) -> list:
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for pc, row in zip(pivots, reduced):
            x = row.get(f)
            if x:
                v[pc] = Fraction(-x, row[pc])
        basis.append(v)
    return basis


def nullspace(M: Matrix, ncols: int | None = None) -> list:
    """Basis of {v : M v = 0}, one vector per free column."""
    if ncols is None:
        ncols = len(M[0]) if M else 0
    pivots, reduced = sparse_rref([_int_row(r) for r in M], ncols)
    return kernel_from_rref(pivots, reduced, ncols)


def sparse_nullspace(rows: list, ncols: int) -> list:
    pivots, reduced = sparse_rows_rref(rows, ncols)
    return kernel_from_rref(pivots, reduced, ncols)


def solve(A: Matrix, b: Sequence) -> list | None:
    """One solution of A x = b (free variables set to 0), or None."""
    n = len(A[0]) if A else 0
    aug = [list(r) + [Fraction(bi)] for r, bi in zip(A, b)]
    pivots, reduced = sparse_rref([_int_row(r) for r in aug], n + 1)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for pc, row in zip(pivots, reduced):
        x[pc] = Fraction(row.get(n, 0), row[pc])
    return x


def inverse(A: Matrix) -> Matrix:
    n = len(A)
    aug = [list(A[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    pivots, reduced = sparse_rref([_int_row(r) for r in aug], 2 * n)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    inv = []
    for i in range(n):
        row = reduced[i]
        inv.append([Fraction(row.get(n + j, 0), row[i]) for j in range(n)])
    return inv


def det_bareiss(A: Matrix):
    """Determinant by Bareiss fraction-free elimination.

    Works over any exact integral domain whose elements support ``*``, ``-``
    and exact ``//``-free division via ``/`` returning an exact quotient
    (Fractions here).  Written independently of :func:`rref` so tests can use
    it as a separate oracle.
    """
    n = len(A)
    if n == 0:
        return Fraction(1)
    M = [list(r) for r in A]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if not M[k][k]:
            for r in range(k + 1, n):
                if M[r][k]:
                    M[k], M[r] = M[r], M[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def column_space_basis(vectors: list) -> list:
    """Subset-free basis: independent vectors spanning the same space."""
    if not vectors:
        return []
    M = transpose(vectors)
    pivots, _ = rref(M)
    return [vectors[j] for j in pivots]
