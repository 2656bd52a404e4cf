"""Decomposable and bi-decomposable n-forms on a symplectic 2n-space.

A bi-decomposition of ω is ω = ω1 − ω2 with ω_i decomposable, ω1 killed by
V2 and a volume on V1, ω2 killed by V1 and a volume on V2, where (V1, V2) is a
transversal pair of Lagrangian subspaces.  In a suitable symplectic basis
ω1 = c·a1*^…^an* and ω2 = b1*^…^bn*; the constant ``c`` is intrinsic to the
ordered pair and changes sign under the swap (ω1, ω2) → (−ω2, −ω1).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Sequence

from ._backend import plucker_residual
from .exterior import (
    ExteriorForm,
    InconsistencyError,
    Subspace,
    SymplecticSpace,
    Vector,
    annihilator,
    forms_in_basis,
    interior_vector,
    is_effective,
    is_lagrangian,
    pullback_linear,
    restrict,
    wedge,
    wedge_all,
)
from .linalg import Matrix, identity, inverse, matmul, nullspace, solve, transpose
from .scalar import isqrt_fraction


class NotBiDecomposableError(ValueError):
    """The input admits no bi-decomposition (of the requested kind).

    ``condition`` names the first violated requirement.
    """

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        super().__init__(condition + (f": {detail}" if detail else ""))


class PreconditionError(ValueError):
    """Input rejected before any computation."""


@dataclass(frozen=True, eq=False)
class BiDecomposition:
    omega1: ExteriorForm
    omega2: ExteriorForm
    V1: Subspace
    V2: Subspace
    c: Fraction
    basis: tuple = ()

    def swapped(self) -> "BiDecomposition":
        """The other ordering: (−ω2, −ω1) on (V2, V1), with constant −c for odd n."""
        n = self.omega1.degree
        sign = -1 if n % 2 else 1
        return BiDecomposition(-self.omega2, -self.omega1, self.V2, self.V1, sign * self.c)

    def same_as(self, other: "BiDecomposition") -> bool:
        return (self.omega1 == other.omega1 and self.omega2 == other.omega2
                and self.V1 == other.V1 and self.V2 == other.V2)

    def same_up_to_swap(self, other: "BiDecomposition") -> bool:
        return self.same_as(other) or self.same_as(other.swapped())


@dataclass(frozen=True, eq=False)
class HitchinData:
    K: Matrix
    lam: Fraction
    epsilon: ExteriorForm
    even_n: bool = False


# ---------------------------------------------------------------------------
# decomposability

def _int_terms(w: ExteriorForm) -> dict:
    den = 1
    for c in w.terms.values():
        den = lcm(den, c.denominator)
    return {k: c.numerator * (den // c.denominator) for k, c in w.terms.items()}


def plucker_violation(w: ExteriorForm):
    """First nonzero Plücker relation as (J, K, value) or None."""
    return plucker_residual(_int_terms(w), w.degree)


def is_decomposable(w: ExteriorForm) -> bool:
    """ω = β1^…^βk?  Annihilator dimension and Plücker relations must agree."""
    if w.is_zero():
        raise ValueError("the zero form is rejected")
    k = w.degree
    if k <= 1 or k >= w.dim - 1:
        return True
    by_ann = annihilator(w).dimension == w.dim - k
    by_plucker = plucker_violation(w) is None
    if by_ann != by_plucker:
        raise InconsistencyError(f"annihilator test says {by_ann}, Plücker test says {by_plucker}")
    return by_ann


def decomposable_factors(w: ExteriorForm) -> list | None:
    """Covectors β1..βk with ω = β1^…^βk, or None if ω is not decomposable."""
    if not is_decomposable(w):
        return None
    k = w.degree
    if k == 0:
        return []
    ann = annihilator(w)
    # covectors vanishing on the annihilator span the factor space
    rows = ann.matrix() if ann.basis else []
    betas = nullspace(rows, w.dim) if rows else [
        [Fraction(int(i == j)) for j in range(w.dim)] for i in range(w.dim)
    ]
    covs = [ExteriorForm.covector(b) for b in betas]
    prod = wedge_all(covs)
    key = next(iter(prod.terms))
    ratio = w.terms.get(key, Fraction(0)) / prod.terms[key]
    covs[0] = covs[0] * ratio
    if wedge_all(covs) != w:
        raise InconsistencyError("factor extraction did not reproduce the form")
    return covs


# ---------------------------------------------------------------------------
# Hitchin operator

def hitchin_operator(psi: ExteriorForm, epsilon: ExteriorForm) -> HitchinData:
    """K with K(u)·ε = A(i_u ψ ^ ψ), where A(η) = Σ_i e_i ⊗ (e_i* ^ η).

    Column j of K holds the components of K(e_j).  For even n the map is
    ½(ψ^ψ/ε)·id rather than zero; ``even_n`` flags that case.
    """
    m = psi.dim
    if epsilon.degree != m or epsilon.is_zero():
        raise ValueError("ε must be a nonzero top-degree form")
    top = tuple(range(1, m + 1))
    e0 = epsilon.terms[top]
    K = [[Fraction(0)] * m for _ in range(m)]
    for j in range(1, m + 1):
        eta = wedge(interior_vector(Vector.unit(m, j), psi), psi)
        for missing, c in _missing_index_terms(eta, m):
            i = missing
            sign = -1 if (i - 1) % 2 else 1
            K[i - 1][j - 1] = sign * c / e0
    K2 = matmul(K, K)
    tr = sum((K2[i][i] for i in range(m)), Fraction(0))
    return HitchinData(K, tr / m, epsilon, even_n=(psi.degree % 2 == 0))


def _missing_index_terms(eta: ExteriorForm, m: int):
    full = set(range(1, m + 1))
    for idx, c in eta.terms.items():
        (missing,) = full - set(idx)
        yield missing, c


# ---------------------------------------------------------------------------
# normal form and verification

def _check_lagrangian_pair(V1: Subspace, V2: Subspace, S: SymplecticSpace):
    if not is_lagrangian(V1, S):
        raise PreconditionError("V1 is not Lagrangian")
    if not is_lagrangian(V2, S):
        raise PreconditionError("V2 is not Lagrangian")
    if V1.sum_dimension(V2) != S.dim:
        raise PreconditionError("V1 and V2 are not transversal")


def normalize_symplectic(omega1: ExteriorForm, omega2: ExteriorForm, S: SymplecticSpace):
    """Symplectic basis [a1..an, b1..bn] and c with ω1 = c·a*, ω2 = b*.

    The result is verified exactly before it is returned.
    """
    n = S.n
    if omega1.degree != n or omega2.degree != n:
        raise NotBiDecomposableError("not a bi-decomposition", "degrees must equal n")
    if omega1.is_zero() or omega2.is_zero():
        raise NotBiDecomposableError("not a bi-decomposition", "a summand is zero")
    V1 = annihilator(omega2)
    V2 = annihilator(omega1)
    if V1.dimension != n or V2.dimension != n:
        raise NotBiDecomposableError("not a bi-decomposition", "a summand is not decomposable")
    if not (is_lagrangian(V1, S) and is_lagrangian(V2, S)) or V1.sum_dimension(V2) != S.dim:
        raise NotBiDecomposableError("not a bi-decomposition", "annihilators are not a transversal Lagrangian pair")
    a = [list(v.components) for v in V1.basis]
    w = [list(v.components) for v in V2.basis]
    G = [[S.pairing(ai, wj) for wj in w] for ai in a]
    Gi = inverse(G)
    # b_j = Σ_k w_k (G^{-1})_{kj}
    b = [[sum((w[k][t] * Gi[k][j] for k in range(n)), Fraction(0)) for t in range(S.dim)] for j in range(n)]
    c1 = omega1.evaluate(a)
    c2 = omega2.evaluate(b)
    if not c1 or not c2:
        raise NotBiDecomposableError("not a bi-decomposition", "a summand is not a volume on its subspace")
    a[0] = [x * c2 for x in a[0]]
    b[0] = [x / c2 for x in b[0]]
    c = c1 * c2
    basis = [Vector(S.dim, tuple(v)) for v in a + b]
    top = tuple(range(1, n + 1))
    ok = (
        forms_in_basis(basis, {top: c}) == omega1
        and forms_in_basis(basis, {tuple(range(n + 1, 2 * n + 1)): 1}) == omega2
        and forms_in_basis(basis, {(i, n + i): 1 for i in range(1, n + 1)}) == S.theta
    )
    if not ok:
        raise InconsistencyError("normal form failed exact verification")
    return basis, c


def _projections(V1: Subspace, V2: Subspace):
    B = transpose(V1.matrix() + V2.matrix())  # columns: V1 basis then V2 basis
    Bi = inverse(B)
    n1 = V1.dimension
    # B·diag(1..1, 0..0)·B⁻¹ without forming the diagonal factors
    P1 = matmul([row[:n1] for row in B], Bi[:n1])
    P2 = matmul([row[n1:] for row in B], Bi[n1:])
    return P1, P2


def verify_bidecomposition(omega: ExteriorForm, V1: Subspace, V2: Subspace,
                           S: SymplecticSpace | None = None) -> BiDecomposition:
    """Check that (V1, V2) carries a bi-decomposition of ω; return it.

    Raises :class:`PreconditionError` for a non-Lagrangian or non-transversal
    pair and :class:`NotBiDecomposableError` (with ``.condition``) otherwise.
    """
    if S is None:
        S = SymplecticSpace.standard(omega.dim // 2)
    _check_lagrangian_pair(V1, V2, S)
    P1, P2 = _projections(V1, V2)
    omega1 = pullback_linear(P1, omega)
    omega2 = -pullback_linear(P2, omega)
    if omega1 - omega2 != omega:
        raise NotBiDecomposableError("ω ≠ ω1 − ω2")
    for v in V2.basis:
        if not interior_vector(v, omega1).is_zero():
            raise NotBiDecomposableError("ω1 not annihilated by V2")
    for u in V1.basis:
        if not interior_vector(u, omega2).is_zero():
            raise NotBiDecomposableError("ω2 not annihilated by V1")
    if restrict(omega1, V1).is_zero():
        raise NotBiDecomposableError("ω1 not a volume on V1")
    if restrict(omega2, V2).is_zero():
        raise NotBiDecomposableError("ω2 not a volume on V2")
    basis, c = normalize_symplectic(omega1, omega2, S)
    return BiDecomposition(omega1, omega2, V1, V2, c, tuple(basis))


# ---------------------------------------------------------------------------
# odd-n recovery

def bidecompose_odd(omega: ExteriorForm, S: SymplecticSpace, *, branch: str = "positive",
                    epsilon_scale=1) -> BiDecomposition:
    """Recover the bi-decomposition of ω for odd n ≥ 3 from ω and Θ alone.

    Both candidates ω1 = ½(ω ± λ^{−n/2} K*ω), ω2 = ω1 − ω are formed and
    validated.  A bi-decomposable ω always yields two valid candidates which
    are swaps of each other with opposite constants; ``branch="positive"``
    returns the one with c > 0 and ``branch="negative"`` the other.
    """
    n = S.n
    if n % 2 == 0 or n < 3:
        raise PreconditionError("blind recovery needs odd n ≥ 3; for even n supply a pair hint")
    if omega.dim != S.dim or omega.degree != n:
        raise PreconditionError("ω must be an n-form on the 2n-dimensional space")
    if omega.is_zero():
        raise NotBiDecomposableError("not bi-decomposable", "ω = 0")
    if not is_effective(omega, S):
        raise NotBiDecomposableError("not bi-decomposable", "ω is not effective")
    t = Fraction(epsilon_scale)
    if not t:
        raise ValueError("ε scale must be nonzero")
    eps = S.epsilon() * t
    hd = hitchin_operator(omega, eps)
    lam = hd.lam
    c0 = isqrt_fraction(lam)
    if c0 is None or c0 == 0:
        raise NotBiDecomposableError("not bi-decomposable over the rationals", f"λ = {lam}")
    k_omega = pullback_linear(hd.K, omega) * (1 / c0 ** n)
    found = []
    errors = []
    for s in (1, -1):
        omega1 = (omega + k_omega * s) * Fraction(1, 2)
        omega2 = omega1 - omega
        try:
            if omega1.is_zero() or omega2.is_zero():
                raise NotBiDecomposableError("summand vanishes")
            if not (is_decomposable(omega1) and is_decomposable(omega2)):
                raise NotBiDecomposableError("summand not decomposable")
            V1 = annihilator(omega2)
            V2 = annihilator(omega1)
            _check_lagrangian_pair(V1, V2, S)
            if restrict(omega1, V1).is_zero() or restrict(omega2, V2).is_zero():
                raise NotBiDecomposableError("volume condition fails")
            basis, c = normalize_symplectic(omega1, omega2, S)
        except (NotBiDecomposableError, PreconditionError) as exc:
            errors.append(str(exc))
            continue
        found.append(BiDecomposition(omega1, omega2, V1, V2, c, tuple(basis)))
    if not found:
        raise NotBiDecomposableError("not bi-decomposable", "; ".join(errors))
    if len(found) == 2 and not found[0].same_as(found[1].swapped()):
        raise InconsistencyError("the two validated branches are not swaps of each other")
    want_positive = branch == "positive"
    if branch not in ("positive", "negative"):
        raise ValueError("branch must be 'positive' or 'negative'")
    for bd in found:
        if (bd.c > 0) == want_positive:
            return bd
    raise NotBiDecomposableError("requested branch did not validate", "; ".join(errors))


# ---------------------------------------------------------------------------
# randomized helpers

def random_symplectic_matrix(S: SymplecticSpace, rng: random.Random, steps: int = 4,
                             span: int = 2) -> Matrix:
    """Product of symplectic transvections x ↦ x + t·Θ(v, x)·v.

    ``v`` has integer entries in [−span, span]; ``t`` is a small rational.
    """
    m = S.dim
    W = S.matrix()
    M = identity(m)
    ts = [Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2), Fraction(-1, 2)]
    for _ in range(steps):
        while True:
            v = [Fraction(rng.randint(-span, span)) for _ in range(m)]
            if any(v):
                break
        t = rng.choice(ts)
        # T = I + t·v·(vᵀW), applied as M ↦ M + t·v·((vᵀW)·M)
        row = [sum((v[i] * W[i][j] for i in range(m)), Fraction(0)) for j in range(m)]
        rm = [sum((row[i] * M[i][j] for i in range(m) if row[i]), Fraction(0)) for j in range(m)]
        M = [[M[i][j] + t * v[i] * rm[j] if v[i] else M[i][j] for j in range(m)] for i in range(m)]
    return M


def apply_to_subspace(g: Matrix, V: Subspace) -> Subspace:
    vecs = [[sum((g[i][j] * v[j] for j in range(len(v))), Fraction(0)) for i in range(len(g))]
            for v in V.basis]
    return Subspace(V.dim_ambient, tuple(vecs))


def standard_pair(n: int):
    m = 2 * n
    V1 = Subspace(m, tuple(Vector.unit(m, i) for i in range(1, n + 1)))
    V2 = Subspace(m, tuple(Vector.unit(m, i) for i in range(n + 1, m + 1)))
    return V1, V2


@dataclass
class UniquenessReport:
    bi_decomposable: bool
    reference: BiDecomposition | None
    accepted: list = field(default_factory=list)
    trials: int = 0
    flags: list = field(default_factory=list)

    @property
    def distinct_pairs(self) -> int:
        return len(self.accepted)

    @property
    def only_reference(self) -> bool:
        if self.reference is None:
            return False
        return all(bd.same_up_to_swap(self.reference) for bd in self.accepted)


def uniqueness_oracle(omega: ExteriorForm, S: SymplecticSpace, trials: int = 1000, seed: int = 0,
                      reference: BiDecomposition | None = None,
                      candidates: Sequence | None = None) -> UniquenessReport:
    """Search for bi-decompositions of ω on random transversal Lagrangian pairs.

    Trials alternate between random symplectic images of the standard pair and
    of the reference pair.  The reference pair itself (in both orders) is
    tested first, so an accepted reference always counts as one pair.  Every
    accepted pair is recorded (deduplicated up to swap).  ``candidates`` adds explicit (V1, V2) pairs to test.
    """
    n = S.n
    report = UniquenessReport(False, None)
    if reference is None and n % 2 == 1 and n >= 3:
        try:
            reference = bidecompose_odd(omega, S)
        except NotBiDecomposableError:
            reference = None
    if reference is None and candidates:
        for V1, V2 in candidates:
            try:
                reference = verify_bidecomposition(omega, V1, V2, S)
                break
            except (NotBiDecomposableError, PreconditionError):
                continue
    if reference is None:
        report.flags.append("not bi-decomposable input")
        return report
    report.bi_decomposable = True
    report.reference = reference

    def record(bd: BiDecomposition):
        for old in report.accepted:
            if bd.same_up_to_swap(old):
                return
        report.accepted.append(bd)

    rng = random.Random(seed)
    std = standard_pair(n)
    ref_pair = (reference.V1, reference.V2)
    pairs = [ref_pair, (reference.V2, reference.V1)] + list(candidates or [])
    for t in range(trials):
        g = random_symplectic_matrix(S, rng, steps=rng.randint(1, 4))
        base = std if t % 2 == 0 else ref_pair
        pairs.append((apply_to_subspace(g, base[0]), apply_to_subspace(g, base[1])))
    for V1, V2 in pairs:
        report.trials += 1
        try:
            record(verify_bidecomposition(omega, V1, V2, S))
        except (NotBiDecomposableError, PreconditionError):
            continue
    return report


# ---------------------------------------------------------------------------
# equivalence tests

def decomposable_equivalence(omega: ExteriorForm, omega_p: ExteriorForm, S: SymplecticSpace) -> bool:
    """Does ω′ = λω + φ^Θ hold for some λ ≠ 0 and (n−2)-form φ?

    Computed by a linear solve and, independently, by comparing annihilators
    (identical or Θ-perpendicular); the two answers must agree.
    """
    n = S.n
    for w in (omega, omega_p):
        if w.degree != n or w.dim != S.dim:
            raise ValueError("both forms must be n-forms on the 2n-dimensional space")
        if w.is_zero() or not is_decomposable(w):
            raise ValueError("both forms must be nonzero and decomposable")
    # linear route
    cols = [omega]
    for idx in combinations(range(1, S.dim + 1), n - 2):
        cols.append(wedge(ExteriorForm(S.dim, n - 2, {idx: 1}), S.theta))
    keys = sorted({k for c in cols for k in c.terms} | set(omega_p.terms))
    A = [[c.terms.get(k, Fraction(0)) for c in cols] for k in keys]
    rhs = [omega_p.terms.get(k, Fraction(0)) for k in keys]
    x = solve(A, rhs)
    if x is None:
        by_solve = False
    elif x[0] != 0:
        by_solve = True
    else:
        by_solve = any(v[0] != 0 for v in nullspace(A, len(cols)))
    # annihilator route
    A1 = annihilator(omega)
    A2 = annihilator(omega_p)
    identical = A1 == A2
    perpendicular = all(S.pairing(u, v) == 0 for u in A1.basis for v in A2.basis) and \
        A1.dimension + A2.dimension == S.dim
    by_ann = identical or perpendicular
    if by_solve != by_ann:
        raise InconsistencyError(f"linear solve says {by_solve}, annihilator test says {by_ann}")
    return by_solve


@dataclass
class ProportionalityReport:
    implication_holds: bool
    mu: Fraction | None
    counterexample: tuple | None
    subspaces_checked: int


def proportionality_constant(omega: ExteriorForm, omega_p: ExteriorForm) -> Fraction | None:
    """μ with ω′ = μω, or None."""
    if omega.is_zero():
        return Fraction(0) if omega_p.is_zero() else None
    key = next(iter(sorted(omega.terms)))
    mu = omega_p.terms.get(key, Fraction(0)) / omega.terms[key]
    return mu if omega * mu == omega_p else None


def effective_proportionality_oracle(omega: ExteriorForm, omega_p: ExteriorForm,
                                     S: SymplecticSpace) -> ProportionalityReport:
    """Brute-force check of "ω|L = 0 ⟹ ω′|L = 0" on isotropic L from a {0,1} grid.

    Grid vectors are taken in a symplectic basis of S.  The proportionality
    constant μ is computed independently; if μ exists but the implication
    fails on the sample, an inconsistency is raised.
    """
    from .exterior import symplectic_basis

    if S.n > 3:
        raise ValueError("oracle restricted to n ≤ 3")
    if omega.degree != omega_p.degree:
        raise ValueError("forms must have the same degree")
    k = omega.degree
    if k > S.n:
        raise ValueError("degree must be at most n")
    for w in (omega, omega_p):
        if not is_effective(w, S):
            raise ValueError("both forms must be effective")
    basis = symplectic_basis(S)
    m = S.dim
    grid = []
    for mask in range(1, 2 ** m):
        coeffs = [(mask >> t) & 1 for t in range(m)]
        v = [sum((Fraction(coeffs[t]) * basis[t][i] for t in range(m)), Fraction(0)) for i in range(m)]
        grid.append(v)
    W = S.matrix()
    pair = [[sum((u[i] * W[i][j] * v[j] for i in range(m) if u[i] for j in range(m) if v[j]), Fraction(0))
             for v in grid] for u in grid]
    mu = proportionality_constant(omega, omega_p)
    holds = True
    witness = None
    checked = 0
    if k == 0:
        zero = omega.scalar_value() == 0
        holds = not zero or omega_p.scalar_value() == 0
    else:
        for combo in combinations(range(len(grid)), k):
            if any(pair[i][j] for i, j in combinations(combo, 2)):
                continue
            vecs = [grid[i] for i in combo]
            if k > 1 and _rank_small(vecs) < k:
                continue
            checked += 1
            if omega.evaluate(vecs) == 0 and omega_p.evaluate(vecs) != 0:
                holds = False
                witness = tuple(Vector(m, tuple(v)) for v in vecs)
                break
    if mu is not None and not holds:
        raise InconsistencyError("ω′ = μω but the vanishing implication failed")
    return ProportionalityReport(holds, mu, witness, checked)


def _rank_small(vecs) -> int:
    from .linalg import rank

    return rank(vecs)
