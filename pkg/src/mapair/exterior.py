"""Constant-coefficient exterior algebra on a finite-dimensional space.

Index tuples are 1-based and strictly increasing.  The interior product
``i_v`` inserts ``v`` in the first slot, and for a bivector ``i_{u^v}`` is
``i_v`` applied after ``i_u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import factorial, lcm
from typing import Iterable, Mapping, Sequence

from ._backend import merge_sign, wedge_terms
from .linalg import (
    Matrix,
    inverse,
    matvec,
    nullspace,
    rank,
    to_fraction_matrix,
    transpose,
)


class DegenerateFormError(ValueError):
    """The bilinear form is degenerate."""


class InconsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagreed."""


def _frac_terms(terms: Mapping) -> dict:
    out = {}
    for k, v in terms.items():
        v = Fraction(v)
        if v:
            out[tuple(k)] = v
    return out


@dataclass(frozen=True, eq=False)
class ExteriorForm:
    dim: int
    degree: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if not 0 <= self.degree <= self.dim:
            raise ValueError(f"degree {self.degree} out of range for dim {self.dim}")
        clean = _frac_terms(self.terms)
        for k in clean:
            if len(k) != self.degree:
                raise ValueError(f"index tuple {k} has wrong length for degree {self.degree}")
            if any(a >= b for a, b in zip(k, k[1:])):
                raise ValueError(f"index tuple {k} is not strictly increasing")
            if k and (k[0] < 1 or k[-1] > self.dim):
                raise ValueError(f"index tuple {k} out of range 1..{self.dim}")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def _raw(cls, dim: int, degree: int, terms: dict) -> "ExteriorForm":
        obj = cls.__new__(cls)
        object.__setattr__(obj, "dim", dim)
        object.__setattr__(obj, "degree", degree)
        object.__setattr__(obj, "terms", {k: Fraction(v) for k, v in terms.items() if v})
        return obj

    @classmethod
    def zero(cls, dim: int, degree: int) -> "ExteriorForm":
        return cls._raw(dim, degree, {})

    @classmethod
    def scalar(cls, dim: int, value) -> "ExteriorForm":
        return cls._raw(dim, 0, {(): Fraction(value)})

    @classmethod
    def basis(cls, dim: int, indices: Sequence[int], coeff=1) -> "ExteriorForm":
        """``coeff * e_{i1}^* ^ ... ^ e_{ik}^*`` for arbitrary distinct indices."""
        idx = tuple(indices)
        if len(set(idx)) != len(idx):
            return cls.zero(dim, len(idx))
        order = sorted(range(len(idx)), key=lambda r: idx[r])
        sign = _perm_sign(order)
        return cls(dim, len(idx), {tuple(sorted(idx)): sign * Fraction(coeff)})

    @classmethod
    def covector(cls, comps: Sequence) -> "ExteriorForm":
        return cls(len(comps), 1, {(i + 1,): c for i, c in enumerate(comps)})

    def is_zero(self) -> bool:
        return not self.terms

    def scalar_value(self) -> Fraction:
        if self.degree != 0:
            raise ValueError("not a scalar")
        return self.terms.get((), Fraction(0))

    def _check(self, other: "ExteriorForm"):
        if not isinstance(other, ExteriorForm):
            raise TypeError("expected an ExteriorForm")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        self._check(other)
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return ExteriorForm._raw(self.dim, self.degree, out)

    def __neg__(self):
        return ExteriorForm._raw(self.dim, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, ExteriorForm):
            return NotImplemented
        c = Fraction(c)
        return ExteriorForm._raw(self.dim, self.degree, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / Fraction(c))

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, ExteriorForm):
            return NotImplemented
        return (self.dim, self.degree, self.terms) == (other.dim, other.degree, other.terms)

    def __hash__(self):
        return hash((self.dim, self.degree, frozenset(self.terms.items())))

    def evaluate(self, vectors: Sequence[Sequence]) -> Fraction:
        """ω(v1, ..., vk) on component vectors."""
        if len(vectors) != self.degree:
            raise ValueError("wrong number of arguments")
        if self.degree == 0:
            return self.scalar_value()
        cols = [_components(v, self.dim) for v in vectors]
        L = [[v[i] for v in cols] for i in range(self.dim)]
        pulled = pullback_linear(L, self)
        return pulled.terms.get(tuple(range(1, self.degree + 1)), Fraction(0))

    def __repr__(self):
        return f"ExteriorForm(dim={self.dim}, degree={self.degree}, {format_terms(self)})"


def format_terms(w: ExteriorForm) -> str:
    if not w.terms:
        return "0"
    parts = []
    for k in sorted(w.terms):
        c = w.terms[k]
        idx = "^".join(f"e{i}" for i in k) if k else "1"
        parts.append(f"{c}*{idx}")
    return " + ".join(parts)


def _perm_sign(order: Sequence[int]) -> int:
    sign = 1
    order = list(order)
    for i in range(len(order)):
        while order[i] != i:
            j = order[i]
            order[i], order[j] = order[j], order[i]
            sign = -sign
    return sign


def _components(v, dim: int) -> list:
    comps = v.components if isinstance(v, Vector) else v
    if len(comps) != dim:
        raise ValueError(f"vector of length {len(comps)} in dimension {dim}")
    return [Fraction(x) for x in comps]


@dataclass(frozen=True)
class Vector:
    dim: int
    components: tuple

    def __post_init__(self):
        comps = tuple(Fraction(x) for x in self.components)
        if len(comps) != self.dim:
            raise ValueError("vector length does not match dim")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, comps: Sequence) -> "Vector":
        return cls(len(comps), tuple(comps))

    @classmethod
    def unit(cls, dim: int, i: int) -> "Vector":
        """1-based standard basis vector."""
        return cls(dim, tuple(int(j == i - 1) for j in range(dim)))

    def __add__(self, other):
        return Vector(self.dim, tuple(a + b for a, b in zip(self.components, _components(other, self.dim))))

    def __sub__(self, other):
        return Vector(self.dim, tuple(a - b for a, b in zip(self.components, _components(other, self.dim))))

    def __neg__(self):
        return Vector(self.dim, tuple(-a for a in self.components))

    def __mul__(self, c):
        c = Fraction(c)
        return Vector(self.dim, tuple(a * c for a in self.components))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / Fraction(c))

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return self.dim

    def __getitem__(self, i):
        return self.components[i]

    def is_zero(self) -> bool:
        return not any(self.components)


@dataclass(frozen=True, eq=False)
class Bivector:
    dim: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = _frac_terms(self.terms)
        for (i, j) in clean:
            if not 1 <= i < j <= self.dim:
                raise ValueError(f"bivector index pair {(i, j)} must be increasing in 1..{self.dim}")
        object.__setattr__(self, "terms", clean)

    def __eq__(self, other):
        return isinstance(other, Bivector) and (self.dim, self.terms) == (other.dim, other.terms)


@dataclass(frozen=True, eq=False)
class Subspace:
    dim_ambient: int
    basis: tuple

    def __post_init__(self):
        vecs = tuple(Vector(self.dim_ambient, tuple(_components(v, self.dim_ambient))) for v in self.basis)
        if vecs and rank([list(v.components) for v in vecs]) != len(vecs):
            raise ValueError("subspace basis is linearly dependent")
        object.__setattr__(self, "basis", vecs)

    @classmethod
    def span(cls, dim: int, vectors: Iterable) -> "Subspace":
        """Subspace spanned by possibly dependent vectors."""
        vecs = [list(_components(v, dim)) for v in vectors]
        vecs = [v for v in vecs if any(v)]
        if not vecs:
            return cls(dim, ())
        from .linalg import rref

        pivots, reduced = rref(vecs)
        out = []
        for pc, row in zip(pivots, reduced):
            out.append([Fraction(row.get(j, 0), row[pc]) for j in range(dim)])
        return cls(dim, tuple(out))

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def matrix(self) -> Matrix:
        """Rows are basis vectors."""
        return [list(v.components) for v in self.basis]

    def contains(self, v) -> bool:
        comps = _components(v, self.dim_ambient)
        if not any(comps):
            return True
        if not self.basis:
            return False
        return rank(self.matrix() + [comps]) == self.dimension

    def __eq__(self, other):
        if not isinstance(other, Subspace) or other.dim_ambient != self.dim_ambient:
            return False
        if other.dimension != self.dimension:
            return False
        return all(self.contains(v) for v in other.basis)

    def __hash__(self):
        return hash((self.dim_ambient, self.dimension))

    def sum_dimension(self, other: "Subspace") -> int:
        rows = self.matrix() + other.matrix()
        return rank(rows) if rows else 0


@dataclass(frozen=True, eq=False)
class SymplecticSpace:
    n: int
    theta: ExteriorForm

    def __post_init__(self):
        if self.theta.degree != 2 or self.theta.dim != 2 * self.n:
            raise ValueError("Θ must be a 2-form on a 2n-dimensional space")
        if rank(theta_matrix(self.theta)) != 2 * self.n:
            raise DegenerateFormError("Θ is degenerate")

    @classmethod
    def standard(cls, n: int) -> "SymplecticSpace":
        """Θ = Σ a_i* ^ b_i* with a_i = e_i and b_i = e_{n+i}."""
        return cls(n, ExteriorForm(2 * n, 2, {(i, n + i): 1 for i in range(1, n + 1)}))

    @property
    def dim(self) -> int:
        return 2 * self.n

    def pairing(self, u, v) -> Fraction:
        u = _components(u, self.dim)
        v = _components(v, self.dim)
        total = Fraction(0)
        for (i, j), c in self.theta.terms.items():
            x = u[i - 1] * v[j - 1] - u[j - 1] * v[i - 1]
            if x:
                total += c * x
        return total

    def matrix(self) -> Matrix:
        return theta_matrix(self.theta)

    def x_theta(self) -> Bivector:
        return x_theta(self)

    def epsilon(self) -> ExteriorForm:
        """(−1)^{n(n−1)/2} Θ^n / n!, equal to a* ^ b* in any symplectic basis."""
        n = self.n
        top = ExteriorForm.scalar(self.dim, 1)
        for _ in range(n):
            top = wedge(top, self.theta)
        sign = -1 if (n * (n - 1) // 2) % 2 else 1
        return top * Fraction(sign, factorial(n))


def theta_matrix(theta: ExteriorForm) -> Matrix:
    m = theta.dim
    W = [[Fraction(0)] * m for _ in range(m)]
    for (i, j), c in theta.terms.items():
        W[i - 1][j - 1] += c
        W[j - 1][i - 1] -= c
    return W


def x_theta(S: SymplecticSpace) -> Bivector:
    """The bivector dual to Θ; Σ a_i ^ b_i in a symplectic basis."""
    P = inverse(S.matrix())
    m = S.dim
    return Bivector(m, {(i + 1, j + 1): -P[i][j] for i in range(m) for j in range(i + 1, m) if P[i][j]})


# ---------------------------------------------------------------------------
# operations

def wedge(a: ExteriorForm, b: ExteriorForm) -> ExteriorForm:
    a._check(b)
    deg = a.degree + b.degree
    if deg > a.dim:
        return _overflow_zero(a.dim, deg)
    return ExteriorForm._raw(a.dim, deg, wedge_terms(a.terms, b.terms))


def _overflow_zero(dim: int, deg: int) -> ExteriorForm:
    obj = ExteriorForm.__new__(ExteriorForm)
    object.__setattr__(obj, "dim", dim)
    object.__setattr__(obj, "degree", deg)
    object.__setattr__(obj, "terms", {})
    return obj


def wedge_all(forms: Sequence[ExteriorForm], dim: int | None = None) -> ExteriorForm:
    if not forms:
        if dim is None:
            raise ValueError("empty wedge needs a dimension")
        return ExteriorForm.scalar(dim, 1)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def interior_vector(v, w: ExteriorForm) -> ExteriorForm:
    if w.degree < 1:
        raise ValueError("interior product of a degree-0 form")
    comps = _components(v, w.dim)
    out: dict = {}
    for idx, c in w.terms.items():
        for r, i in enumerate(idx):
            x = comps[i - 1]
            if x:
                key = idx[:r] + idx[r + 1:]
                val = c * x if r % 2 == 0 else -c * x
                s = out.get(key, 0) + val
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
    return ExteriorForm._raw(w.dim, w.degree - 1, out)


def interior_basis(i: int, w: ExteriorForm) -> ExteriorForm:
    """i_{e_i} w for the 1-based standard basis vector e_i."""
    if w.degree < 1:
        raise ValueError("interior product of a degree-0 form")
    out = {}
    for idx, c in w.terms.items():
        if i in idx:
            r = idx.index(i)
            out[idx[:r] + idx[r + 1:]] = c if r % 2 == 0 else -c
    return ExteriorForm._raw(w.dim, w.degree - 1, out)


def interior_bivector(B: Bivector, w: ExteriorForm) -> ExteriorForm:
    if w.degree < 2:
        raise ValueError("bivector contraction needs degree ≥ 2")
    if B.dim != w.dim:
        raise ValueError("dimension mismatch")
    out = ExteriorForm.zero(w.dim, w.degree - 2)
    for (i, j), c in B.terms.items():
        out = out + interior_basis(j, interior_basis(i, w)) * c
    return out


def _scaled_int_rows(L: Matrix):
    den = 1
    for row in L:
        for x in row:
            if x:
                den = lcm(den, Fraction(x).denominator)
    rows = [[int(Fraction(x) * den) for x in row] for row in L]
    return rows, den


def pullback_linear(L: Matrix, w: ExteriorForm) -> ExteriorForm:
    """(L*ω)(v1..vk) = ω(L v1, ..., L vk) for an m×m′ matrix L (m = dim ω).

    ``L`` maps the source space (m′ columns) into ω's space (m rows), so its
    row count must equal ``w.dim``.  The pulled-back covectors are wedged with
    prefix memoisation over integer-scaled coefficients.
    """
    L = to_fraction_matrix(L)
    if len(L) != w.dim:
        raise ValueError(f"matrix has {len(L)} rows, form lives in dim {w.dim}")
    m_src = len(L[0]) if L else 0
    if w.degree == 0:
        return ExteriorForm._raw(m_src, 0, dict(w.terms))
    rows, den = _scaled_int_rows(L)
    cov = [{(j + 1,): x for j, x in enumerate(row) if x} for row in rows]
    cden = 1
    for c in w.terms.values():
        cden = lcm(cden, c.denominator)
    memo: dict = {(): {(): 1}}

    def prefix(idx: tuple) -> dict:
        r = memo.get(idx)
        if r is None:
            r = wedge_terms(prefix(idx[:-1]), cov[idx[-1] - 1])
            memo[idx] = r
        return r

    acc: dict = {}
    for idx in sorted(w.terms):
        c = w.terms[idx]
        ci = c.numerator * (cden // c.denominator)
        for k, v in prefix(idx).items():
            s = acc.get(k, 0) + ci * v
            if s:
                acc[k] = s
            else:
                acc.pop(k, None)
    scale = Fraction(1, cden * den ** w.degree)
    return ExteriorForm._raw(m_src, w.degree, {k: v * scale for k, v in acc.items()})


def change_basis(w: ExteriorForm, basis: Sequence) -> ExteriorForm:
    """Express ω in the dual basis of ``basis`` (list of vectors)."""
    B = transpose([_components(v, w.dim) for v in basis])
    return pullback_linear(B, w)


def forms_in_basis(basis: Sequence, terms: Mapping) -> ExteriorForm:
    """Form with given coefficients relative to the dual basis of ``basis``."""
    m = len(basis)
    Binv = inverse(transpose([_components(v, m) for v in basis]))
    return pullback_linear(Binv, ExteriorForm(m, len(next(iter(terms))) if terms else 0, terms))


def symplectic_basis(S: SymplecticSpace) -> list:
    """Return [a1..an, b1..bn] with Θ(a_i, b_j) = δ_ij and isotropic halves.

    Deterministic: at every step the lexicographically first pair of remaining
    vectors with nonzero pairing is used, starting from the standard basis.
    """
    m = S.dim
    W = S.matrix()

    def pair(u, v):
        return sum((u[i] * W[i][j] * v[j] for i in range(m) if u[i] for j in range(m) if v[j]), Fraction(0))

    remaining = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    a_list, b_list = [], []
    while remaining:
        found = None
        for i in range(len(remaining)):
            for j in range(i + 1, len(remaining)):
                t = pair(remaining[i], remaining[j])
                if t:
                    found = (i, j, t)
                    break
            if found:
                break
        if found is None:
            raise DegenerateFormError("Θ is degenerate on the remaining complement")
        i, j, t = found
        a = remaining[i]
        b = [x / t for x in remaining[j]]
        rest = [v for k, v in enumerate(remaining) if k not in (i, j)]
        new = []
        for v in rest:
            vb = pair(v, b)
            va = pair(v, a)
            new.append([v[k] - vb * a[k] + va * b[k] for k in range(m)])
        remaining = new
        a_list.append(a)
        b_list.append(b)
    return [Vector(m, tuple(v)) for v in a_list + b_list]


def is_effective(phi: ExteriorForm, S: SymplecticSpace) -> bool:
    if phi.dim != S.dim:
        raise ValueError("dimension mismatch")
    if phi.degree < 2:
        return True
    by_contraction = interior_bivector(S.x_theta(), phi).is_zero()
    if phi.degree == S.n:
        by_wedge = wedge(phi, S.theta).is_zero()
        if by_wedge != by_contraction:
            raise InconsistencyError(
                f"contraction test says {by_contraction}, wedge test says {by_wedge}"
            )
    return by_contraction


def is_isotropic(W: Subspace, S: SymplecticSpace) -> bool:
    vs = W.basis
    return all(S.pairing(vs[i], vs[j]) == 0 for i in range(len(vs)) for j in range(i + 1, len(vs)))


def is_lagrangian(W: Subspace, S: SymplecticSpace) -> bool:
    if W.dim_ambient != S.dim:
        raise ValueError("ambient dimension must be 2n")
    return W.dimension == S.n and is_isotropic(W, S)


def contraction_matrix(w: ExteriorForm) -> tuple:
    """Matrix of v ↦ i_v ω with rows indexed by (k−1)-tuples."""
    cols = [interior_basis(j, w) for j in range(1, w.dim + 1)]
    keys = sorted({k for c in cols for k in c.terms})
    M = [[c.terms.get(k, Fraction(0)) for c in cols] for k in keys]
    return M, keys


def annihilator(w: ExteriorForm) -> Subspace:
    if w.is_zero():
        raise ValueError("annihilator of the zero form is undefined here")
    if w.degree == 0:
        return Subspace.span(w.dim, [Vector.unit(w.dim, i) for i in range(1, w.dim + 1)])
    M, _ = contraction_matrix(w)
    return Subspace(w.dim, tuple(nullspace(M, w.dim)))


def restrict(w: ExteriorForm, W: Subspace) -> ExteriorForm:
    """ω restricted to W, in the dual basis of W's stored basis."""
    if not W.basis:
        return ExteriorForm._raw(1, w.degree, {}) if w.degree else w
    L = transpose(W.matrix())
    return pullback_linear(L, w)


def vanishes_on(w: ExteriorForm, W: Subspace) -> bool:
    if w.degree > W.dimension:
        return True
    return restrict(w, W).is_zero()


def all_index_tuples(m: int, k: int):
    return combinations(range(1, m + 1), k)


# ---------------------------------------------------------------------------
# form file format

def format_form(w: ExteriorForm) -> str:
    lines = [f"dim {w.dim}", f"degree {w.degree}"]
    for idx in sorted(w.terms):
        c = w.terms[idx]
        cs = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
        lines.append(f"term {cs} : {' '.join(str(i) for i in idx)}".rstrip())
    return "\n".join(lines) + "\n"


class FormParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def parse_form(text: str) -> ExteriorForm:
    dim = degree = None
    terms: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "dim":
                dim = int(rest)
            elif head == "degree":
                degree = int(rest)
            elif head == "term":
                if dim is None or degree is None:
                    raise FormParseError("term before dim/degree header", lineno)
                coef_s, sep, idx_s = rest.partition(":")
                if not sep:
                    raise FormParseError("term line needs ':' between coefficient and indices", lineno)
                coef = Fraction(coef_s.strip())
                idx = tuple(int(t) for t in idx_s.split())
                if len(idx) != degree:
                    raise FormParseError(f"expected {degree} indices, got {len(idx)}", lineno)
                if any(a >= b for a, b in zip(idx, idx[1:])):
                    raise FormParseError("indices must be strictly increasing", lineno)
                if idx and (idx[0] < 1 or idx[-1] > dim):
                    raise FormParseError(f"index out of range 1..{dim}", lineno)
                terms[idx] = terms.get(idx, Fraction(0)) + coef
            else:
                raise FormParseError(f"unknown directive {head!r}", lineno)
        except FormParseError:
            raise
        except (ValueError, ZeroDivisionError) as exc:
            raise FormParseError(str(exc), lineno) from exc
    if dim is None or degree is None:
        raise FormParseError("missing dim or degree header")
    try:
        return ExteriorForm(dim, degree, terms)
    except ValueError as exc:
        raise FormParseError(str(exc)) from exc
