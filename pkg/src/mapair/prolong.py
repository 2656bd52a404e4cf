"""Graded Lie algebras m = g_{-2} ⊕ g_{-1} with a matrix g_0, and their
Tanaka prolongation.

Matrices are (n+2)×(n+2) with indices 0..n+1.  The negative part is spanned by
γ = E_{n+1,0}, e_i = E_{i,0} and f_j = E_{n+1,j}; every structure constant is
obtained from a matrix commutator followed by an exact coordinate solve.

Two choices of g_0 are provided:

* ``"ma"``: ⟨ε⟩ ⊕ sl(n) with ε = −E_00 + E_{n+1,n+1} (bi-decomposable systems);
* ``"lc"``: {diag(α, A, β) : α + tr A + β = 0} (Lagrangian contact, flat model).

A level-k element (k ≥ 1) is a pair (α, β) with α : g_{-1} → g_{k-1} and
β : g_{-2} → g_{k-2}, subject to

    (i)  β([x, y]) = [α(x), y] − [α(y), x]      for x, y in g_{-1},
    (ii) [α(y), z] = [β(z), y]                   for y in g_{-1}, z in g_{-2}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .linalg import Matrix, inverse, rref, sparse_nullspace

VARIANTS = {"ma": "BiDecomposableMA", "lc": "LagrangianContact"}


class GradingError(ValueError):
    """A bracket left the graded piece it must land in."""


class ProlongationBoundError(RuntimeError):
    """Prolongation did not terminate within the configured level bound."""


def unit_matrix(size: int, i: int, j: int) -> Matrix:
    M = [[Fraction(0)] * size for _ in range(size)]
    M[i][j] = Fraction(1)
    return M


def commutator(A: Matrix, B: Matrix) -> Matrix:
    s = len(A)
    out = [[Fraction(0)] * s for _ in range(s)]
    # sparse-aware product: most basis matrices have one or two entries
    a_nz = [(i, k, A[i][k]) for i in range(s) for k in range(s) if A[i][k]]
    b_nz = [(k, j, B[k][j]) for k in range(s) for j in range(s) if B[k][j]]
    b_rows: dict = {}
    for k, j, v in b_nz:
        b_rows.setdefault(k, []).append((j, v))
    a_rows: dict = {}
    for k, j, v in a_nz:
        a_rows.setdefault(k, []).append((j, v))
    for i, k, v in a_nz:
        for j, w in b_rows.get(k, ()):
            out[i][j] += v * w
    for i, k, v in b_nz:
        for j, w in a_rows.get(k, ()):
            out[i][j] -= v * w
    return out


def _flat(M: Matrix) -> list:
    return [x for row in M for x in row]


class _Coords:
    """Coordinates relative to a list of linearly independent matrices."""

    def __init__(self, basis: Sequence[Matrix], size: int):
        self.size = size
        self.flat = [_flat(B) for B in basis]
        self.dim = len(self.flat)
        if self.dim:
            self.rows = _choose_rows(self.flat)
            sub = [[self.flat[b][r] for b in range(self.dim)] for r in self.rows]
            self.inv = inverse(sub)
        else:
            self.rows = []
            self.inv = []

    def coords(self, M: Matrix, what: str = "") -> list:
        f = _flat(M)
        if not self.dim:
            if any(f):
                raise GradingError(f"bracket {what} should vanish but does not")
            return []
        rhs = [f[r] for r in self.rows]
        x = [sum((self.inv[i][j] * rhs[j] for j in range(self.dim) if rhs[j]), Fraction(0))
             for i in range(self.dim)]
        recon = [Fraction(0)] * len(f)
        for b, xb in enumerate(x):
            if xb:
                for t, v in enumerate(self.flat[b]):
                    if v:
                        recon[t] += xb * v
        if recon != f:
            raise GradingError(f"bracket {what} is not in the expected graded piece")
        return x


def _choose_rows(flat: list) -> list:
    """Matrix-entry positions on which the basis is independent.

    Row-reducing the basis (one row per matrix) puts pivots exactly on such
    positions.
    """
    pivots, _ = rref(flat)
    if len(pivots) != len(flat):
        raise ValueError("graded piece basis is linearly dependent")
    return pivots


@dataclass(eq=False)
class GradedLA:
    n: int
    variant: str
    size: int
    levels: dict  # degree -> list of matrices (degrees −2, −1, 0)
    names: dict  # degree -> list of names
    brackets: dict = field(default_factory=dict)  # ((p, a), (q, b)) -> coord list in degree p+q

    @property
    def dims(self) -> dict:
        return {p: len(v) for p, v in self.levels.items()}

    def basis_elements(self):
        for p in (-2, -1, 0):
            for a in range(len(self.levels[p])):
                yield (p, a)

    def bracket(self, x, y) -> dict:
        """[x, y] on basis labels as {label: coefficient}; degrees > 0 vanish."""
        p, q = x[0], y[0]
        r = p + q
        if r < -2 or r > 0:
            return {}
        vec = self.brackets[(x, y)]
        return {(r, i): c for i, c in enumerate(vec) if c}

    def m_bracket_form(self) -> Matrix:
        """A with [X, Y] = −A(X, Y)γ on g_{-1}; γ is the g_{-2} basis element."""
        d = len(self.levels[-1])
        A = [[Fraction(0)] * d for _ in range(d)]
        for a in range(d):
            for b in range(d):
                vec = self.brackets[((-1, a), (-1, b))]
                A[a][b] = -vec[0] if vec else Fraction(0)
        return A


def from_matrices(n: int, g_minus2: Sequence[Matrix], g_minus1: Sequence[Matrix],
                  g0: Sequence[Matrix], variant: str = "custom",
                  names: dict | None = None) -> GradedLA:
    """Build structure constants from matrix commutators."""
    size = len(g_minus1[0]) if g_minus1 else len(g0[0])
    levels = {-2: list(g_minus2), -1: list(g_minus1), 0: list(g0)}
    coords = {p: _Coords(levels[p], size) for p in (-2, -1, 0)}
    empty = _Coords([], size)
    brackets = {}
    for p in (-2, -1, 0):
        for a, A in enumerate(levels[p]):
            for q in (-2, -1, 0):
                for b, B in enumerate(levels[q]):
                    r = p + q
                    C = commutator(A, B)
                    target = coords.get(r, empty) if r >= -2 else empty
                    if r > 0:
                        target = empty
                    vec = target.coords(C, f"[{p}:{a}, {q}:{b}]")
                    brackets[((p, a), (q, b))] = vec
    if names is None:
        names = {p: [f"g{p}_{i}" for i in range(len(levels[p]))] for p in levels}
    return GradedLA(n, variant, size, levels, names, brackets)


def build_mg0(n: int, variant: str) -> GradedLA:
    """m ⊕ g_0 inside gl(n+2) for ``variant`` in {"ma", "lc"}."""
    if n < 2:
        raise ValueError("n must be at least 2")
    v = _variant_key(variant)
    size = n + 2
    last = n + 1
    gm2 = [unit_matrix(size, last, 0)]
    gm1 = [unit_matrix(size, i, 0) for i in range(1, n + 1)] + \
          [unit_matrix(size, last, j) for j in range(1, n + 1)]
    names = {
        -2: ["gamma"],
        -1: [f"e{i}" for i in range(1, n + 1)] + [f"f{j}" for j in range(1, n + 1)],
    }
    g0 = []
    g0_names = []
    if v == "ma":
        eps = unit_matrix(size, last, last)
        eps[0][0] = Fraction(-1)
        g0.append(eps)
        g0_names.append("eps")
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j:
                    g0.append(unit_matrix(size, i, j))
                    g0_names.append(f"E{i}{j}")
        for i in range(1, n):
            H = unit_matrix(size, i, i)
            H[n][n] = Fraction(-1)
            g0.append(H)
            g0_names.append(f"H{i}")
    else:
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j:
                    g0.append(unit_matrix(size, i, j))
                    g0_names.append(f"E{i}{j}")
        D = unit_matrix(size, 0, 0)
        D[last][last] = Fraction(-1)
        g0.append(D)
        g0_names.append(f"E00-E{last}{last}")
        for i in range(1, n + 1):
            H = unit_matrix(size, i, i)
            H[last][last] = Fraction(-1)
            g0.append(H)
            g0_names.append(f"E{i}{i}-E{last}{last}")
    names[0] = g0_names
    return from_matrices(n, gm2, gm1, g0, v, names)


def _variant_key(variant: str) -> str:
    key = variant.lower()
    aliases = {"ma": "ma", "bidecomposablema": "ma", "lc": "lc", "lagrangiancontact": "lc"}
    if key not in aliases:
        raise ValueError(f"unknown variant {variant!r}; use 'ma' or 'lc'")
    return aliases[key]


def jacobi_check(g: GradedLA) -> bool:
    """Jacobi identity on all basis triples, using the stored constants."""
    elems = list(g.basis_elements())

    def br(x, y):
        return g.bracket(x, y)

    def br_vec(vec: dict, z) -> dict:
        out: dict = {}
        for lab, c in vec.items():
            for lab2, c2 in br(lab, z).items():
                out[lab2] = out.get(lab2, 0) + c * c2
        return out

    for x, y, z in combinations(elems, 3):
        total: dict = {}
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            # [a, [b, c]] = −[[b, c], a]
            inner = br(b, c)
            for lab, coef in br_vec(inner, a).items():
                total[lab] = total.get(lab, 0) - coef
        if any(total.values()):
            return False
    return True


# ---------------------------------------------------------------------------
# prolongation

@dataclass(eq=False)
class ProlongSpace:
    """Level-k prolongation.  ``basis[t] = (alpha, beta)`` with ``alpha[a][x]``
    the a-th coordinate (in g_{k-1}) of α(x) for x in g_{-1}, and ``beta[b][z]``
    likewise for β into g_{k-2}."""

    k: int
    basis: list

    @property
    def dim(self) -> int:
        return len(self.basis)


class Prolongation:
    """Holds levels ≤ 0 and the computed positive levels."""

    def __init__(self, g: GradedLA):
        self.g = g
        self.spaces: dict = {}

    def dim(self, j: int) -> int:
        if j < -2:
            return 0
        if j <= 0:
            return len(self.g.levels[j])
        return self.spaces[j].dim

    def act(self, j: int, a: int, w) -> list:
        """[u_a, w] for u_a the a-th basis element of level j and w = (p, idx) in m."""
        p, idx = w
        r = j + p
        if r < -2:
            return []
        if j <= 0:
            return self.g.brackets[((j, a), w)] if r <= 0 else []
        alpha, beta = self.spaces[j].basis[a]
        mat = alpha if p == -1 else beta
        return [row[idx] for row in mat]

    def step(self, k: int) -> ProlongSpace:
        g = self.g
        d1 = self.dim(-1)
        d2 = self.dim(-2)
        dA = self.dim(k - 1)
        dB = self.dim(k - 2)
        # unknown layout: alpha[a][x] -> a*d1 + x ; beta[b][z] -> offset + b*d2 + z
        off = dA * d1
        nvars = off + dB * d2
        rows = []
        # condition (i)
        for x in range(d1):
            for y in range(x + 1, d1):
                xy = g.brackets[((-1, x), (-1, y))]  # in g_{-2}
                eqs: dict = {}
                for z, cz in enumerate(xy):
                    if cz:
                        for b in range(dB):
                            eqs.setdefault(b, {})
                            key = off + b * d2 + z
                            eqs[b][key] = eqs[b].get(key, 0) + cz
                for a in range(dA):
                    v_ay = self.act(k - 1, a, (-1, y))  # [u_a, y] in g_{k-2}
                    for b, c in enumerate(v_ay):
                        if c:
                            eqs.setdefault(b, {})
                            key = a * d1 + x
                            eqs[b][key] = eqs[b].get(key, 0) - c
                    v_ax = self.act(k - 1, a, (-1, x))
                    for b, c in enumerate(v_ax):
                        if c:
                            eqs.setdefault(b, {})
                            key = a * d1 + y
                            eqs[b][key] = eqs[b].get(key, 0) + c
                rows.extend({kk: vv for kk, vv in e.items() if vv} for e in eqs.values())
        # condition (ii): target level k-3
        if k - 3 >= -2:
            for y in range(d1):
                for z in range(d2):
                    eqs = {}
                    for a in range(dA):
                        v = self.act(k - 1, a, (-2, z))
                        for t, c in enumerate(v):
                            if c:
                                eqs.setdefault(t, {})
                                key = a * d1 + y
                                eqs[t][key] = eqs[t].get(key, 0) + c
                    for b in range(dB):
                        v = self.act(k - 2, b, (-1, y))
                        for t, c in enumerate(v):
                            if c:
                                eqs.setdefault(t, {})
                                key = off + b * d2 + z
                                eqs[t][key] = eqs[t].get(key, 0) - c
                    rows.extend({kk: vv for kk, vv in e.items() if vv} for e in eqs.values())
        rows = [r for r in rows if r]
        kernel = sparse_nullspace(rows, nvars) if nvars else []
        basis = []
        for vec in kernel:
            alpha = [[vec[a * d1 + x] for x in range(d1)] for a in range(dA)]
            beta = [[vec[off + b * d2 + z] for z in range(d2)] for b in range(dB)]
            basis.append((alpha, beta))
        space = ProlongSpace(k, basis)
        self.spaces[k] = space
        return space

    def check_level(self, k: int) -> bool:
        """Re-verify conditions (i) and (ii) for every stored basis element."""
        g = self.g
        d1, d2 = self.dim(-1), self.dim(-2)
        dA, dB = self.dim(k - 1), self.dim(k - 2)
        for alpha, beta in self.spaces[k].basis:
            for x in range(d1):
                for y in range(x + 1, d1):
                    xy = g.brackets[((-1, x), (-1, y))]
                    lhs = [sum((beta[b][z] * xy[z] for z in range(d2)), Fraction(0)) for b in range(dB)]
                    rhs = [Fraction(0)] * dB
                    for a in range(dA):
                        for b, c in enumerate(self.act(k - 1, a, (-1, y))):
                            rhs[b] += alpha[a][x] * c
                        for b, c in enumerate(self.act(k - 1, a, (-1, x))):
                            rhs[b] -= alpha[a][y] * c
                    if lhs != rhs:
                        return False
            if k - 3 >= -2:
                dC = self.dim(k - 3)
                for y in range(d1):
                    for z in range(d2):
                        lhs = [Fraction(0)] * dC
                        rhs = [Fraction(0)] * dC
                        for a in range(dA):
                            for t, c in enumerate(self.act(k - 1, a, (-2, z))):
                                lhs[t] += alpha[a][y] * c
                        for b in range(dB):
                            for t, c in enumerate(self.act(k - 2, b, (-1, y))):
                                rhs[t] += beta[b][z] * c
                        if lhs != rhs:
                            return False
        return True


@dataclass
class ProlongationResult:
    n: int
    variant: str
    dims: dict  # level -> dim, including −2, −1, 0

    @property
    def total(self) -> int:
        return sum(self.dims.values())

    def positive_levels(self) -> list:
        return [(k, d) for k, d in sorted(self.dims.items()) if k >= 1]


def prolong(g: GradedLA, max_level: int = 12) -> tuple:
    """Compute levels until two consecutive zeros; returns (Prolongation, result)."""
    P = Prolongation(g)
    dims = {p: len(g.levels[p]) for p in (-2, -1, 0)}
    zeros = 0
    k = 0
    while zeros < 2:
        k += 1
        if k > max_level:
            raise ProlongationBoundError(f"no termination up to level {max_level}")
        d = P.step(k).dim
        dims[k] = d
        zeros = zeros + 1 if d == 0 else 0
    return P, ProlongationResult(g.n, g.variant, dims)


def prolong_step(g: GradedLA, k: int, previous: Prolongation | None = None) -> ProlongSpace:
    """Level-k space; computes missing lower levels on the way."""
    P = previous or Prolongation(g)
    for j in range(1, k):
        if j not in P.spaces:
            P.step(j)
    return P.step(k)


def symmetry_dimension(g: GradedLA, max_level: int = 12) -> int:
    return prolong(g, max_level)[1].total
