from __future__ import annotations

import random
from fractions import Fraction

import pytest

from mapair import bidecomp as bd
from mapair.exterior import (
    ExteriorForm,
    InconsistencyError,
    Subspace,
    SymplecticSpace,
    Vector,
    is_effective,
    pullback_linear,
    wedge,
)
from mapair.linalg import identity, inverse, matmul


def E(m, *idx, c=1):
    return ExteriorForm.basis(m, idx, c)


def normal(n: int, c) -> tuple:
    m = 2 * n
    return E(m, *range(1, n + 1), c=c), E(m, *range(n + 1, m + 1))


def hitchin_example() -> ExteriorForm:
    """a123 − a1b2b3 − b1a2b3 − b1b2a3: effective with λ = −4."""
    return E(6, 1, 2, 3) - E(6, 1, 5, 6) - E(6, 4, 2, 6) - E(6, 4, 5, 3)


def test_decomposability_examples():
    assert bd.is_decomposable(E(6, 1, 2, 3))
    assert not bd.is_decomposable(E(6, 1, 2, 3, c=2) - E(6, 4, 5, 6))
    assert not bd.is_decomposable(E(4, 1, 2) + E(4, 3, 4))
    assert bd.plucker_violation(E(4, 1, 2) + E(4, 3, 4)) is not None
    with pytest.raises(ValueError):
        bd.is_decomposable(ExteriorForm.zero(6, 3))


def test_decomposable_factors_rebuild_the_form():
    rng = random.Random(1)
    for _ in range(10):
        covs = [ExteriorForm.covector([rng.randint(-2, 2) for _ in range(6)]) for _ in range(3)]
        w = wedge(wedge(covs[0], covs[1]), covs[2])
        if w.is_zero():
            continue
        factors = bd.decomposable_factors(w)
        assert factors is not None
        prod = factors[0]
        for f in factors[1:]:
            prod = wedge(prod, f)
        assert prod == w


def test_normalize_examples():
    S3 = SymplecticSpace.standard(3)
    w1, w2 = normal(3, 2)
    basis, c = bd.normalize_symplectic(w1, w2, S3)
    assert c == 2
    assert [v.components for v in basis] == [Vector.unit(6, i).components for i in range(1, 7)]
    S2 = SymplecticSpace.standard(2)
    # coordinates (x, y, p, q): d(x+p)^dy and dp^d(y+q)
    o1 = E(4, 1, 2) - E(4, 2, 3)
    o2 = E(4, 3, 4) - E(4, 2, 3)
    _, c = bd.normalize_symplectic(o1, o2, S2)
    assert c == 1
    with pytest.raises(bd.NotBiDecomposableError):
        bd.normalize_symplectic(E(6, 1, 2, 3), E(6, 1, 2, 4), S3)


def test_normalize_after_random_change():
    rng = random.Random(2)
    S = SymplecticSpace.standard(3)
    for _ in range(5):
        g = bd.random_symplectic_matrix(S, rng)
        gi = inverse(g)
        c = Fraction(rng.choice((2, -3, 5)), rng.choice((1, 2)))
        w1, w2 = (pullback_linear(gi, w) for w in normal(3, c))
        basis, c2 = bd.normalize_symplectic(w1, w2, S)
        assert c2 == c


def test_random_symplectic_matrix_preserves_theta():
    rng = random.Random(3)
    S = SymplecticSpace.standard(3)
    for _ in range(10):
        g = bd.random_symplectic_matrix(S, rng)
        assert pullback_linear(g, S.theta) == S.theta


def test_hitchin_examples():
    S = SymplecticSpace.standard(3)
    eps = S.epsilon()
    assert eps == E(6, 1, 2, 3, 4, 5, 6)
    for c in (Fraction(2), Fraction(-1, 3)):
        w1, w2 = normal(3, c)
        hd = bd.hitchin_operator(w1 - w2, eps)
        assert hd.lam == c * c
        for i in range(6):
            assert hd.K[i][i] == (-c if i < 3 else c)
        assert matmul(hd.K, hd.K) == [[x * c * c for x in row] for row in identity(6)]
    nil = bd.hitchin_operator(E(6, 1, 2, 3), eps)
    assert nil.lam == 0 and all(not x for row in matmul(nil.K, nil.K) for x in row)
    w1, w2 = normal(3, 2)
    hd = bd.hitchin_operator(w1 - w2, eps)
    hd2 = bd.hitchin_operator(w1 - w2, eps * 2)
    assert hd2.K == [[x / 2 for x in row] for row in hd.K] and hd2.lam == hd.lam / 4
    with pytest.raises(ValueError):
        bd.hitchin_operator(w1, ExteriorForm.zero(6, 6))


def test_even_n_hitchin_flag():
    S = SymplecticSpace.standard(2)
    hd = bd.hitchin_operator(E(4, 1, 2) - E(4, 3, 4), S.epsilon())
    assert hd.even_n
    # i_u psi ^ psi is proportional to the volume, so K is a multiple of the identity
    assert all(hd.K[i][j] == (hd.K[0][0] if i == j else 0) for i in range(4) for j in range(4))


def test_bidecompose_examples():
    S = SymplecticSpace.standard(3)
    w1, w2 = normal(3, 2)
    d = bd.bidecompose_odd(w1 - w2, S)
    assert d.omega1 == w1 and d.omega2 == w2 and d.c == 2
    assert d.omega1 - d.omega2 == w1 - w2
    # sum instead of difference: the sign goes into omega2
    d = bd.bidecompose_odd(E(6, 1, 2, 3) + E(6, 4, 5, 6), S)
    assert d.omega1 - d.omega2 == E(6, 1, 2, 3) + E(6, 4, 5, 6)
    assert {d.omega1, d.omega2} in ({E(6, 1, 2, 3), -E(6, 4, 5, 6)}, {-E(6, 4, 5, 6), E(6, 1, 2, 3)},
                                    {E(6, 4, 5, 6), -E(6, 1, 2, 3)})


def test_bidecompose_branches_are_swaps():
    S = SymplecticSpace.standard(3)
    w1, w2 = normal(3, 3)
    pos = bd.bidecompose_odd(w1 - w2, S, branch="positive")
    neg = bd.bidecompose_odd(w1 - w2, S, branch="negative")
    assert pos.same_as(neg.swapped()) and pos.c == 3 and neg.c == -3


def test_bidecompose_epsilon_scale_invariance():
    rng = random.Random(4)
    S = SymplecticSpace.standard(3)
    g = bd.random_symplectic_matrix(S, rng)
    w = pullback_linear(inverse(g), normal(3, Fraction(5, 2))[0] - normal(3, 1)[1])
    ref = bd.bidecompose_odd(w, S)
    for t in (Fraction(3), Fraction(-1, 2), Fraction(7, 5)):
        assert bd.bidecompose_odd(w, S, epsilon_scale=t).same_as(ref)


def test_summands_are_effective():
    rng = random.Random(5)
    S = SymplecticSpace.standard(3)
    for _ in range(5):
        g = bd.random_symplectic_matrix(S, rng)
        w = pullback_linear(inverse(g), normal(3, 2)[0] - normal(3, 1)[1])
        d = bd.bidecompose_odd(w, S)
        assert is_effective(w, S) and is_effective(d.omega1, S) and is_effective(d.omega2, S)


def test_bidecompose_rejections():
    S = SymplecticSpace.standard(3)
    with pytest.raises(bd.NotBiDecomposableError, match="over the rationals"):
        bd.bidecompose_odd(hitchin_example(), S)
    with pytest.raises(bd.NotBiDecomposableError):
        bd.bidecompose_odd(S.theta.__class__.zero(6, 3), S)
    with pytest.raises(bd.PreconditionError):
        bd.bidecompose_odd(E(4, 1, 2), SymplecticSpace.standard(2))
    not_effective = E(6, 1, 2, 4)
    with pytest.raises(bd.NotBiDecomposableError, match="effective"):
        bd.bidecompose_odd(not_effective, S)


def test_verify_bidecomposition_failures():
    S = SymplecticSpace.standard(3)
    V1, V2 = bd.standard_pair(3)
    with pytest.raises(bd.NotBiDecomposableError) as info:
        bd.verify_bidecomposition(E(6, 1, 2, 3), V1, V2, S)
    assert "ω2 not a volume on V2" in info.value.condition
    bad = Subspace(6, (Vector.unit(6, 1), Vector.unit(6, 4), Vector.unit(6, 2)))
    with pytest.raises(bd.PreconditionError):
        bd.verify_bidecomposition(E(6, 1, 2, 3), bad, V2, S)
    with pytest.raises(bd.PreconditionError):
        bd.verify_bidecomposition(E(6, 1, 2, 3), V1, V1, S)


def test_swap_symmetry_validates():
    S = SymplecticSpace.standard(3)
    w1, w2 = normal(3, 2)
    d = bd.verify_bidecomposition(w1 - w2, *bd.standard_pair(3), S)
    s = d.swapped()
    d2 = bd.verify_bidecomposition(w1 - w2, s.V1, s.V2, S)
    assert d2.same_as(s) and d2.c == -2


def test_uniqueness_flags_decomposable_input():
    S = SymplecticSpace.standard(3)
    rep = bd.uniqueness_oracle(E(6, 1, 2, 3), S, trials=5, seed=0)
    assert not rep.bi_decomposable and "not bi-decomposable input" in rep.flags


def test_uniqueness_is_seeded():
    S = SymplecticSpace.standard(3)
    w1, w2 = normal(3, 2)
    a = bd.uniqueness_oracle(w1 - w2, S, trials=40, seed=9)
    b = bd.uniqueness_oracle(w1 - w2, S, trials=40, seed=9)
    assert a.trials == b.trials and a.distinct_pairs == b.distinct_pairs == 1


def test_decomposable_equivalence_examples():
    S = SymplecticSpace.standard(3)
    w = E(6, 4, 5, 6)
    assert bd.decomposable_equivalence(w, w * 2, S)
    assert not bd.decomposable_equivalence(w, E(6, 1, 2, 3), S)
    with pytest.raises(ValueError):
        bd.decomposable_equivalence(hitchin_example(), w, S)


def test_decomposable_equivalence_perpendicular_case():
    S = SymplecticSpace.standard(3)
    # a1^a2^b1 and a2^a3^b3 have Theta-perpendicular annihilators:
    # a2^a3^b3 = a1^a2^b1 + a2^Theta
    w, wp = E(6, 1, 2, 4), E(6, 2, 3, 6)
    assert wp == w + wedge(E(6, 2), S.theta)
    assert bd.decomposable_equivalence(w, wp, S)
    assert not bd.decomposable_equivalence(E(6, 1, 5, 6), E(6, 4, 5, 6), S)


def test_decomposable_equivalence_methods_agree_on_random_input():
    rng = random.Random(6)
    S = SymplecticSpace.standard(2)
    for _ in range(30):
        forms = []
        for _ in range(2):
            a = ExteriorForm.covector([rng.randint(-1, 1) for _ in range(4)])
            b = ExteriorForm.covector([rng.randint(-1, 1) for _ in range(4)])
            forms.append(wedge(a, b))
        if any(f.is_zero() for f in forms):
            continue
        bd.decomposable_equivalence(forms[0], forms[1], S)  # raises if the two methods disagree


def test_effective_proportionality_oracle():
    S = SymplecticSpace.standard(2)
    w = E(4, 1, 2)
    rep = bd.effective_proportionality_oracle(w, w * 3, S)
    assert rep.implication_holds and rep.mu == 3
    rep = bd.effective_proportionality_oracle(w, E(4, 3, 4), S)
    assert not rep.implication_holds and rep.mu is None and rep.counterexample is not None
    rep = bd.effective_proportionality_oracle(w, ExteriorForm.zero(4, 2), S)
    assert rep.implication_holds and rep.mu == 0
    with pytest.raises(ValueError, match="n ≤ 3"):
        bd.effective_proportionality_oracle(E(8, 1, 2), E(8, 1, 2), SymplecticSpace.standard(4))


def test_inconsistency_error_is_runtime_error():
    assert issubclass(InconsistencyError, RuntimeError)
