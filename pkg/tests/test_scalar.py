from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from mapair.scalar import (
    ParseError,
    PoleError,
    Polynomial,
    RationalFunction,
    as_fraction,
    isqrt_fraction,
    parse_polynomial,
    parse_rational_function,
    poly_diff,
    ratfunc_arith,
    ratfunc_eval,
)

VARS = ("x1", "z", "p1")
SYMS = sympy.symbols(VARS)


def random_poly(rng: random.Random, terms: int = 4, deg: int = 2) -> Polynomial:
    out = {}
    for _ in range(terms):
        e = tuple(rng.randint(0, deg) for _ in VARS)
        out[e] = Fraction(rng.randint(-5, 5), rng.choice((1, 2, 3)))
    return Polynomial(VARS, out)


def to_sympy(p: Polynomial):
    expr = sympy.Integer(0)
    for e, c in p.terms.items():
        mono = sympy.Rational(c.numerator, c.denominator)
        for s, k in zip(SYMS, e):
            mono *= s ** k
        expr += mono
    return sympy.expand(expr)


def rf_to_sympy(f: RationalFunction):
    return to_sympy(f.num) / to_sympy(f.den)


polys = st.builds(lambda seed: random_poly(random.Random(seed)), st.integers(0, 10 ** 6))


def test_fraction_canonical():
    q = as_fraction(Fraction(6, -4))
    assert (q.numerator, q.denominator) == (-3, 2)
    assert as_fraction(0) == Fraction(0, 1)


def test_poly_diff_examples():
    vs = ("x1", "z", "p1")
    assert poly_diff(parse_polynomial("x1^2*p1", vs), "x1") == parse_polynomial("2*x1*p1", vs)
    assert poly_diff(Polynomial.constant(5, vs), "z").is_zero()
    vs2 = ("x1", "x2", "z", "p1", "p2")
    f = parse_polynomial("x1*p1 + x2*p2 - z", vs2)
    assert poly_diff(f, "z") == Polynomial.constant(-1, vs2)
    with pytest.raises(ValueError):
        poly_diff(f, "w")


def test_ratfunc_examples():
    vs = ("x1", "p1")
    x1 = RationalFunction.var("x1", vs)
    one = RationalFunction.constant(1, vs)
    assert ratfunc_arith(one / x1, x1, "mul") == one
    assert ratfunc_arith(x1, x1, "sub").is_zero()
    rho = parse_rational_function("1 + p1^2", vs)
    assert ratfunc_arith(one / rho, rho * rho, "mul") == rho
    with pytest.raises(ZeroDivisionError):
        ratfunc_arith(x1, x1 - x1, "div")


def test_ratfunc_eval_examples():
    vs = ("x1", "z", "p1")
    f = parse_rational_function("1 : (1 + p1^2)", vs)
    assert ratfunc_eval(f, {"x1": 0, "z": 0, "p1": 1}) == Fraction(1, 2)
    g = parse_rational_function("x1*p1 - z", vs)
    assert ratfunc_eval(g, {"x1": 2, "p1": 3, "z": 1}) == 5
    with pytest.raises(PoleError):
        ratfunc_eval(parse_rational_function("1 : x1", vs), {"x1": 0, "z": 0, "p1": 0})


@settings(max_examples=40, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert to_sympy(a * b) == sympy.expand(to_sympy(a) * to_sympy(b))


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_leibniz(a, b):
    for v in VARS:
        assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@settings(max_examples=30, deadline=None)
@given(polys, polys, polys)
def test_rational_function_against_sympy(a, b, c):
    if b.is_zero() or c.is_zero():
        return
    f = RationalFunction(a, b)
    d = b + Polynomial.constant(1, VARS)
    g = RationalFunction(c, d if not d.is_zero() else b)
    lhs = rf_to_sympy(f + g) - (rf_to_sympy(f) + rf_to_sympy(g))
    assert sympy.simplify(lhs) == 0
    lhs = rf_to_sympy(f * g) - rf_to_sympy(f) * rf_to_sympy(g)
    assert sympy.simplify(lhs) == 0


def test_canonicalization_idempotent():
    rng = random.Random(5)
    for _ in range(30):
        a, b = random_poly(rng), random_poly(rng)
        if b.is_zero():
            continue
        f = RationalFunction(a, b)
        g = RationalFunction(f.num, f.den)
        assert (g.num.terms, g.den.terms) == (f.num.terms, f.den.terms)
        if f.den.terms:
            lead = f.den.terms[max(f.den.terms)]
            assert lead > 0


def test_eval_is_multiplicative():
    rng = random.Random(6)
    for _ in range(30):
        f = RationalFunction(random_poly(rng), random_poly(rng) + Polynomial.constant(7, VARS))
        g = RationalFunction(random_poly(rng), Polynomial.constant(3, VARS))
        pt = {v: Fraction(rng.randint(-3, 3), rng.choice((1, 2))) for v in VARS}
        try:
            fv = f.evaluate(pt)
        except PoleError:
            continue
        assert (f * g).evaluate(pt) == fv * g.evaluate(pt)


def test_equality_by_cross_multiplication():
    vs = ("x1",)
    a = parse_rational_function("(x1^2 - 1) : (x1 - 1)", vs)
    b = parse_rational_function("x1 + 1", vs)
    assert a == b
    with pytest.raises(TypeError):
        hash(a)


def test_substitute():
    vs = ("x1", "z")
    f = parse_rational_function("x1^2 + z", vs)
    x1 = RationalFunction.var("x1", vs)
    g = f.substitute({"x1": x1, "z": parse_rational_function("1 : x1", vs)}, vs)
    assert g == parse_rational_function("(x1^3 + 1) : x1", vs)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_rational_function("x1 +* 2", ("x1",))
    with pytest.raises(ParseError):
        parse_rational_function("(x1", ("x1",))
    with pytest.raises(ParseError):
        parse_polynomial("1 : x1", ("x1",))


def test_isqrt_fraction():
    assert isqrt_fraction(Fraction(9, 4)) == Fraction(3, 2)
    assert isqrt_fraction(Fraction(2)) is None
    assert isqrt_fraction(Fraction(-4)) is None
