"""The thirteen acceptance criteria; each test prints one PASS/FAIL line."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product

import sympy

from conftest import record
from mapair import bidecomp as bd
from mapair.exterior import (
    ExteriorForm,
    Subspace,
    SymplecticSpace,
    Vector,
    interior_bivector,
    pullback_linear,
    wedge,
)
from mapair.linalg import inverse, matvec
from mapair.prolong import build_mg0, prolong
from mapair.jetforms import (
    Chart,
    PointMap,
    classify_hesse,
    construct_ma,
    euclidean_chart_reduce,
    euclidean_reduced_formula,
    flat,
    interior_field,
    legendre_dual,
    legendrian_lift,
    model_system,
    reduce_mod_theta,
    reeb_closed_formula,
    reeb_field,
    standard_chart,
    theta_independence,
    theta_standard,
    verify_solution,
)
from mapair.jetforms.forms import exterior_d
from mapair.jetforms.systems import apply_flat_symmetry, p_names, volume, x_names
from mapair.scalar import parse_polynomial, parse_rational_function


def normal_pair(n: int, c) -> tuple:
    m = 2 * n
    w1 = ExteriorForm.basis(m, range(1, n + 1), c)
    w2 = ExteriorForm.basis(m, range(n + 1, m + 1))
    return w1, w2


def conjugated(n: int, c, g) -> dict:
    """c·a* − b* in the symplectic basis given by the columns of g."""
    gi = inverse(g)
    w1, w2 = normal_pair(n, c)
    V1, V2 = bd.standard_pair(n)
    return {
        "omega1": pullback_linear(gi, w1),
        "omega2": pullback_linear(gi, w2),
        "V1": bd.apply_to_subspace(g, V1),
        "V2": bd.apply_to_subspace(g, V2),
    }


def random_poly(rng: random.Random, names: list, terms: int = 3) -> str:
    parts = ["1"]
    for _ in range(terms):
        coef = rng.choice([1, 2, -1, Fraction(1, 2), 3])
        mono = "*".join(f"{rng.choice(names)}^{rng.randint(1, 2)}" for _ in range(rng.randint(1, 2)))
        parts.append(f"({coef})*{mono}")
    return " + ".join(parts)


# 1 ---------------------------------------------------------------------------

def test_criterion_01_hitchin_recovery():
    rng = random.Random(1)
    ok = True
    for n, c in product((3, 5), (Fraction(2), Fraction(-3), Fraction(1, 2))):
        S = SymplecticSpace.standard(n)
        for _ in range(10):
            g = bd.random_symplectic_matrix(S, rng, steps=rng.randint(2, 5))
            ref = conjugated(n, c, g)
            omega = ref["omega1"] - ref["omega2"]
            got = bd.bidecompose_odd(omega, S, branch="positive" if c > 0 else "negative")
            ok &= (got.omega1 == ref["omega1"] and got.omega2 == ref["omega2"]
                   and got.V1 == ref["V1"] and got.V2 == ref["V2"] and got.c == c)
            hd = bd.hitchin_operator(omega, S.epsilon())
            ok &= hd.lam == c * c
            for v in ref["V1"].basis:
                ok &= matvec(hd.K, v.components) == [-c * x for x in v.components]
            for v in ref["V2"].basis:
                ok &= matvec(hd.K, v.components) == [c * x for x in v.components]
    record(1, "Hitchin recovery: exact pair, lambda = c^2, K = -c on V1 and c on V2", ok)


# 2 ---------------------------------------------------------------------------

def test_criterion_02_uniqueness_odd_n():
    rng = random.Random(2)
    n = 3
    S = SymplecticSpace.standard(n)
    ok = True
    for idx, c in enumerate((Fraction(2), Fraction(-3), Fraction(1, 2), Fraction(5), Fraction(-1, 3))):
        g = bd.random_symplectic_matrix(S, rng, steps=3)
        ref = conjugated(n, c, g)
        omega = ref["omega1"] - ref["omega2"]
        rep = bd.uniqueness_oracle(omega, S, trials=1000, seed=100 + idx)
        ok &= rep.bi_decomposable and rep.only_reference and rep.distinct_pairs == 1
        ok &= rep.trials >= 1000
        expected = bd.BiDecomposition(ref["omega1"], ref["omega2"], ref["V1"], ref["V2"], c)
        ok &= rep.reference.same_up_to_swap(expected)
    record(2, "uniqueness for n = 3: 5 instances x 1000 trials, reference pair only", ok)


# 3 ---------------------------------------------------------------------------

def remark_pairs():
    # coordinates (x, y, p, q), symplectic form dx^dp + dy^dq
    e = [Vector.unit(4, i) for i in range(1, 5)]
    first = (Subspace(4, (e[0], e[1])), Subspace(4, (e[2], e[3])))
    # annihilators of dp^d(y+q) and d(x+p)^dy
    second = (Subspace(4, (e[0], e[1] - e[3])), Subspace(4, (e[0] - e[2], e[3])))
    return first, second


def test_criterion_03_n2_counterexample():
    S = SymplecticSpace.standard(2)
    omega = ExteriorForm(4, 2, {(1, 2): 1, (3, 4): -1})
    first, second = remark_pairs()
    d1 = bd.verify_bidecomposition(omega, *first, S)
    d2 = bd.verify_bidecomposition(omega, *second, S)
    expect1 = ExteriorForm(4, 2, {(1, 2): 1, (2, 3): -1})  # d(x+p)^dy
    expect2 = ExteriorForm(4, 2, {(2, 3): -1, (3, 4): 1})  # dp^d(y+q)
    rep = bd.uniqueness_oracle(omega, S, trials=50, seed=3, candidates=[first, second])
    ok = (d1.omega1 == ExteriorForm.basis(4, (1, 2)) and d2.omega1 == expect1 and d2.omega2 == expect2
          and not d1.same_up_to_swap(d2) and rep.distinct_pairs >= 2 and not rep.only_reference)
    record(3, "n = 2: both explicit pairs validate, report shows >= 2 distinct pairs", ok)


# 4, 5 ------------------------------------------------------------------------

def test_criterion_04_prolongation_vanishing():
    ok = True
    for n in range(2, 7):
        _, res = prolong(build_mg0(n, "BiDecomposableMA"))
        ok &= res.dims[1] == 0 and res.dims[2] == 0 and res.total == (n + 1) ** 2
    record(4, "variant ma, n = 2..6: g1 = g2 = 0, totals 9 16 25 36 49", ok)


def test_criterion_05_flat_model_prolongation():
    ok = True
    totals = []
    for n in range(2, 6):
        _, res = prolong(build_mg0(n, "LagrangianContact"))
        ok &= (res.dims[1], res.dims[2], res.dims[3]) == (2 * n, 1, 0)
        totals.append(res.total)
    ok &= totals == [15, 24, 35, 48]
    record(5, "variant lc, n = 2..5: levels (2n, 1, 0), totals 15 24 35 48", ok)


# 6, 7 ------------------------------------------------------------------------

def standard_projections(n: int):
    ch = standard_chart(n)
    xs, ps = x_names(n), p_names(n)
    W1 = Chart(tuple(xs + ["z"]))
    W2 = Chart(tuple(["zt"] + ps))
    zt = -ch.var("z")
    for x, p in zip(xs, ps):
        zt = zt + ch.var(x) * ch.var(p)
    pi1 = PointMap(ch, W1, {v: ch.var(v) for v in W1.coordinates})
    pi2 = PointMap(ch, W2, {"zt": zt, **{p: ch.var(p) for p in ps}})
    return ch, W1, W2, pi1, pi2


def test_criterion_06_construction_identity():
    n = 3
    ch, W1, W2, pi1, pi2 = standard_projections(n)
    ok = True
    for c in (1, -1, 2):
        O1 = volume(W1, ["z"] + x_names(n)).scale(W1.rf(c))
        O2 = -volume(W2, ["zt"] + p_names(n))
        sys = construct_ma(O1, O2, theta_standard(n), pi1, pi2)
        expect = volume(ch, x_names(n)).scale(ch.rf(c)) - volume(ch, p_names(n))
        ok &= sys.omega == expect
    record(6, "construction reproduces c dx1^..^dxn - dp1^..^dpn for n = 3, c = 1, -1, 2", ok)


def test_criterion_07_theta_independence():
    rng = random.Random(7)
    n = 2
    ch, W1, W2, pi1, pi2 = standard_projections(n)
    O1 = volume(W1, ["z"] + x_names(n)).scale(W1.rf(parse_rational_function("1 + z^2", W1.coordinates)))
    O2 = -volume(W2, ["zt"] + p_names(n)).scale(W2.rf(parse_rational_function("2 + p1^2", W2.coordinates)))
    th = theta_standard(n)
    ok = True
    for _ in range(10):
        rho = ch.rf(parse_rational_function(random_poly(rng, list(ch.coordinates)), ch.coordinates))
        a = reduce_mod_theta(construct_ma(O1, O2, th, pi1, pi2).omega, th)
        b = reduce_mod_theta(construct_ma(O1, O2, th.scale(rho), pi1, pi2).omega, th)
        ok &= b == a.scale(ch.rf(1) / rho)
        ok &= theta_independence(O1, O2, th, pi1, pi2, rho).is_zero()
    record(7, "theta-independence: rho theta gives omega / rho modulo theta, 10 random rho", ok)


# 8 ---------------------------------------------------------------------------

def test_criterion_08_reeb_formula():
    rng = random.Random(8)
    n = 2
    ch = standard_chart(n)
    ok = True
    for _ in range(10):
        rho = ch.rf(parse_rational_function(random_poly(rng, list(ch.coordinates)), ch.coordinates))
        theta = theta_standard(n).scale(rho)
        R = reeb_field(theta)
        ok &= R == reeb_closed_formula(rho, n)
        ok &= interior_field(R, theta).coefficient(()) == ch.rf(1)
        ok &= interior_field(R, exterior_d(theta)).is_zero()
    record(8, "Reeb solver equals the closed formula for 10 random rho", ok)


# 9 ---------------------------------------------------------------------------

def test_criterion_09_solution_verification():
    rng = random.Random(9)
    n = 3
    ok = True
    hits = 0
    for trial in range(20):
        Q = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                Q[i][j] = Q[j][i] = Fraction(rng.randint(-3, 3), rng.choice((1, 2)))
        det = Fraction(str(sympy.Matrix(n, n, lambda i, j: sympy.Rational(str(Q[i][j]))).det()))
        if trial % 2 == 0 and det != 0:
            c = det
        else:
            c = det + rng.choice((1, -1, Fraction(1, 2)))
            if c == 0:
                c = det + 2
        terms = [f"({Q[i][i] / 2})*x{i + 1}^2" for i in range(n)]
        terms += [f"({Q[i][j]})*x{i + 1}*x{j + 1}" for i in range(n) for j in range(i + 1, n)]
        f = parse_polynomial(" + ".join(terms), x_names(n))
        residual = verify_solution(model_system(flat(c, n)), legendrian_lift(f, n))
        ok &= residual.is_zero() == (det == c)
        hits += residual.is_zero()
        # the residual carries the sign convention +(c - det Hess f)
        ok &= residual == volume(residual.chart, x_names(n)).scale(residual.chart.rf(c - det))
    ok &= hits >= 5
    record(9, "verify_solution is zero iff det Q = c on 20 random quadratics", ok)


# 10 --------------------------------------------------------------------------

def test_criterion_10_legendre_duality():
    ok = True
    for c in (Fraction(2), Fraction(-1), Fraction(5, 3)):
        sys = model_system(flat(c, 3))
        dual = legendre_dual(sys)
        cl = classify_hesse(dual)
        ok &= cl.kind == "Flat" and cl.c == 1 / c
        ok &= dual.generates_same_ideal_as(model_system(flat(1 / c, 3)))
        back = legendre_dual(dual)
        ok &= back.generates_same_ideal_as(sys)
        diff = reduce_mod_theta(back.omega - sys.omega, sys.theta)
        ok &= diff.is_zero()
    record(10, "Legendre dual of Flat(c) is Flat(1/c); double dual gives the same ideal", ok)


# 11 --------------------------------------------------------------------------

def test_criterion_11_euclidean_chart():
    n = 2
    red = euclidean_chart_reduce(n)
    ch = standard_chart(n)
    rho = parse_rational_function("1 + p1^2 + p2^2", ch.coordinates)
    ok = red.system is not None
    ok &= red.g_squared * rho ** (n + 2) == ch.rf(1)
    ok &= red.g == ch.rf(1) / (rho * rho)
    ok &= red.system.omega == euclidean_reduced_formula(n).omega
    cl = classify_hesse(red.system)
    ok &= cl.kind == "EulerLagrange" and cl.F == rho * rho
    record(11, "Euclidean chart reduction, n = 2: squared identity exact, Euler-Lagrange", ok)


# 12 --------------------------------------------------------------------------

def random_constrained_element(rng: random.Random, n: int):
    """(l, k, A, a, b, c') with (det A)^2 = (k l)^n."""
    while True:
        k = Fraction(rng.choice((1, 2, 3, -1, -2)), rng.choice((1, 2)))
        if n % 2 == 0:
            ell = Fraction(rng.choice((1, 2, -3)), rng.choice((1, 3)))
            d = (k * ell) ** (n // 2) * rng.choice((1, -1))
        else:
            t = Fraction(rng.choice((1, 2, 3)), rng.choice((1, 2)))
            ell = t * t / k
            d = t ** n * rng.choice((1, -1))
        # unimodular shear times diag(d, 1, ..)
        A = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for _ in range(3):
            i, j = rng.sample(range(n), 2)
            s = rng.randint(-2, 2)
            A[i] = [A[i][t2] + s * A[j][t2] for t2 in range(n)]
        A[0] = [x * d for x in A[0]]
        a = [Fraction(rng.randint(-2, 2)) for _ in range(n)]
        b = [Fraction(rng.randint(-2, 2)) for _ in range(n)]
        return ell, k, A, a, b, Fraction(rng.randint(-2, 2)), d


def test_criterion_12_flat_symmetry():
    rng = random.Random(12)
    ok = True
    for trial in range(20):
        n = 2 if trial % 2 == 0 else 3
        ell, k, A, a, b, cp, d = random_constrained_element(rng, n)
        detA = Fraction(str(sympy.Matrix(n, n, lambda i, j: sympy.Rational(str(A[i][j]))).det()))
        ok &= detA == d and detA ** 2 == (k * ell) ** n
        res = apply_flat_symmetry(ell, k, A, a, b, cp, model_system(flat(Fraction(3, 2), n)))
        ch = standard_chart(n)
        ok &= res.theta_scalar == ch.rf(k / ell)
        ok &= res.omega_scalar == ch.rf(detA / ell ** n)
    record(12, "flat symmetry scalars k/l and det A / l^n on 20 constrained elements", ok)


# 13 --------------------------------------------------------------------------

def lagrangian_decomposable(S: SymplecticSpace, rng: random.Random) -> ExteriorForm:
    """b1*^..^bn* in a random symplectic basis; effective by construction."""
    g = bd.random_symplectic_matrix(S, rng, steps=3)
    _, w2 = normal_pair(S.n, 1)
    return pullback_linear(inverse(g), w2)


def test_criterion_13_effectiveness_equivalence():
    rng = random.Random(13)
    ok = True
    effective = 0
    for trial in range(200):
        n = 2 if trial % 2 == 0 else 3
        S = SymplecticSpace.standard(n)
        m = 2 * n
        if trial % 4 < 2:
            terms = {}
            for idx in rng.sample(list(combinations(range(1, m + 1), n)), 4):
                terms[idx] = Fraction(rng.randint(-3, 3), rng.choice((1, 2)))
            phi = ExteriorForm(m, n, terms)
        else:
            phi = lagrangian_decomposable(S, rng) * rng.choice((1, -2)) + lagrangian_decomposable(S, rng)
        by_contraction = interior_bivector(S.x_theta(), phi).is_zero()
        by_wedge = wedge(phi, S.theta).is_zero()
        ok &= by_contraction == by_wedge
        effective += by_contraction
    ok &= 0 < effective < 200
    record(13, "contraction test and wedge-with-symplectic-form test agree on 200 random forms", ok)
