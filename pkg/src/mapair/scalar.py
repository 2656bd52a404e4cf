"""Exact scalars: rationals, sparse multivariate polynomials, rational functions.

Rationals are :class:`fractions.Fraction`.  A :class:`Polynomial` carries an
ordered tuple of variable names and a dict from exponent tuples to nonzero
Fractions.  A :class:`RationalFunction` is a numerator/denominator pair over the
same variables, reduced only by constant content and common monomial factors
(plus a trial exact division); equality is decided by cross-multiplication.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

from ._backend import poly_mul

Rational = Fraction
Scalar = Union[int, Fraction]


class PoleError(ArithmeticError):
    """A denominator vanished where a value was requested."""


class ChartMismatchError(ValueError):
    """Two scalars built on different variable lists were combined."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, RationalFunction):
        c = x.constant_value()
        if c is None:
            raise TypeError(f"not a constant: {x}")
        return c
    if isinstance(x, Polynomial):
        c = x.constant_value()
        if c is None:
            raise TypeError(f"not a constant: {x}")
        return c
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _merge_vars(a: tuple, b: tuple) -> tuple:
    if a == b or not b:
        return a
    if not a:
        return b
    raise ChartMismatchError(f"variable lists differ: {a} vs {b}")


class Polynomial:
    """Sparse polynomial with Fraction coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Iterable[str], terms: Mapping | None = None):
        vs = tuple(variables)
        if len(set(vs)) != len(vs):
            raise ValueError(f"repeated variable names in {vs}")
        clean = {}
        if terms:
            nv = len(vs)
            for e, c in terms.items():
                e = tuple(e)
                if len(e) != nv:
                    raise ValueError(f"exponent {e} does not match variables {vs}")
                c = as_fraction(c)
                if c:
                    clean[e] = c
        self.variables = vs
        self.terms = clean

    @classmethod
    def _raw(cls, variables: tuple, terms: dict) -> "Polynomial":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj.terms = terms
        return obj

    # construction helpers
    @classmethod
    def constant(cls, c, variables: Iterable[str] = ()) -> "Polynomial":
        vs = tuple(variables)
        c = as_fraction(c)
        return cls._raw(vs, {(0,) * len(vs): c} if c else {})

    @classmethod
    def var(cls, name: str, variables: Iterable[str]) -> "Polynomial":
        vs = tuple(variables)
        if name not in vs:
            raise ValueError(f"unknown variable {name!r}")
        e = tuple(1 if v == name else 0 for v in vs)
        return cls._raw(vs, {e: Fraction(1)})

    def with_variables(self, variables: Iterable[str]) -> "Polynomial":
        """Re-express on a variable list containing all variables in use."""
        vs = tuple(variables)
        if vs == self.variables:
            return self
        pos = {v: i for i, v in enumerate(vs)}
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(vs)
            for v, k in zip(self.variables, e):
                if k:
                    if v not in pos:
                        raise ChartMismatchError(f"variable {v!r} not in {vs}")
                    ne[pos[v]] = k
            out[tuple(ne)] = c
        return Polynomial._raw(vs, out)

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self) -> Fraction | None:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1:
            (e, c), = self.terms.items()
            if not any(e):
                return c
        return None

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def leading(self):
        e = max(self.terms)
        return e, self.terms[e]

    def used_variables(self) -> set:
        used = set()
        for e in self.terms:
            for v, k in zip(self.variables, e):
                if k:
                    used.add(v)
        return used

    # arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other, self.variables)
        return NotImplemented

    def _align(self, other: "Polynomial"):
        vs = _merge_vars(self.variables, other.variables)
        a = self if self.variables == vs else self.with_variables(vs)
        b = other if other.variables == vs else other.with_variables(vs)
        return vs, a, b

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        vs, a, b = self._align(other)
        out = dict(a.terms)
        for e, c in b.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Polynomial._raw(vs, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial._raw(self.variables, {})
            return Polynomial._raw(self.variables, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        vs, a, b = self._align(other)
        return Polynomial._raw(vs, poly_mul(a.terms, b.terms))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Polynomial.constant(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.constant_value() == other
        if isinstance(other, Polynomial):
            if self.variables != other.variables:
                try:
                    _, a, b = self._align(other)
                except ChartMismatchError:
                    return False
                return a.terms == b.terms
            return self.terms == other.terms
        if isinstance(other, RationalFunction):
            return RationalFunction.from_poly(self) == other
        return NotImplemented

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def diff(self, v: str) -> "Polynomial":
        """Partial derivative with respect to the variable named ``v``."""
        if v not in self.variables:
            raise ValueError(f"unknown variable {v!r} (variables: {self.variables})")
        i = self.variables.index(v)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = c * k
        return Polynomial._raw(self.variables, out)

    def evaluate(self, point: Mapping[str, Scalar]) -> Fraction:
        vals = []
        for v in self.variables:
            if v in point:
                vals.append(as_fraction(point[v]))
            else:
                vals.append(None)
        total = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for val, k in zip(vals, e):
                if k:
                    if val is None:
                        raise ValueError("point does not assign every variable in use")
                    t *= val ** k
            total += t
        return total

    def exact_div(self, d: "Polynomial") -> "Polynomial | None":
        """Return ``q`` with ``self == q*d`` or None if ``d`` does not divide."""
        vs, p, d = self._align(d)
        if not d.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        ld, lc = d.leading()
        if len(d.terms) == 1:
            out = {}
            for e, c in p.terms.items():
                ne = tuple(x - y for x, y in zip(e, ld))
                if min(ne, default=0) < 0:
                    return None
                out[ne] = c / lc
            return Polynomial._raw(vs, out)
        r = dict(p.terms)
        q = {}
        dterms = list(d.terms.items())
        while r:
            lr = max(r)
            ne = tuple(x - y for x, y in zip(lr, ld))
            if min(ne, default=0) < 0:
                return None
            coef = r[lr] / lc
            q[ne] = coef
            for e, c in dterms:
                key = tuple(x + y for x, y in zip(e, ne))
                v = r.get(key, 0) - coef * c
                if v:
                    r[key] = v
                else:
                    r.pop(key, None)
        return Polynomial._raw(vs, q)

    def content(self) -> Fraction:
        """Positive rational c with self/c primitive over the integers."""
        from math import gcd

        if not self.terms:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def min_monomial(self) -> tuple:
        if not self.terms:
            return (0,) * len(self.variables)
        es = list(self.terms)
        return tuple(min(col) for col in zip(*es)) if self.variables else ()

    def substitute(self, values: Mapping[str, "Polynomial"], variables: Iterable[str]) -> "Polynomial":
        """Compose with polynomial values for every variable in use."""
        vs = tuple(variables)
        cache: dict = {}
        out = Polynomial._raw(vs, {})
        one = Polynomial.constant(1, vs)
        for e, c in self.terms.items():
            t = one * c
            for v, k in zip(self.variables, e):
                if k:
                    key = (v, k)
                    pw = cache.get(key)
                    if pw is None:
                        if v not in values:
                            raise ValueError(f"no value supplied for {v!r}")
                        pw = _as_poly_on(values[v], vs) ** k
                        cache[key] = pw
                    t = t * pw
            out = out + t
        return out

    def __repr__(self):
        return f"Polynomial({self.variables}, {format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def _as_poly_on(x, vs: tuple) -> Polynomial:
    if isinstance(x, Polynomial):
        return x.with_variables(vs) if x.variables != vs else x
    if isinstance(x, RationalFunction):
        p = x.as_polynomial()
        if p is None:
            raise ValueError("expected a polynomial value")
        return _as_poly_on(p, vs)
    return Polynomial.constant(x, vs)


def format_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: Polynomial) -> str:
    if not p.terms:
        return "0"
    parts = []
    for e in sorted(p.terms, reverse=True):
        c = p.terms[e]
        mono = "*".join(
            (v if k == 1 else f"{v}^{k}") for v, k in zip(p.variables, e) if k
        )
        sign = "-" if c < 0 else "+"
        a = -c if c < 0 else c
        if mono:
            body = mono if a == 1 else f"{format_fraction(a)}*{mono}"
        else:
            body = format_fraction(a)
        parts.append((sign, body))
    first_sign, first = parts[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s


class RationalFunction:
    """Quotient of two polynomials on the same variables.

    Canonical form: the denominator's lex-leading coefficient is 1, and common
    monomial factors are cancelled.  No multivariate gcd is attempted beyond a
    trial exact division in each direction, so two equal functions may have
    different stored representatives; ``==`` cross-multiplies.
    """

    __slots__ = ("num", "den")
    __hash__ = None  # equality is semantic (cross-multiplication)

    def __init__(self, num, den=None, variables: Iterable[str] | None = None):
        vs = tuple(variables) if variables is not None else None
        num = _to_poly(num, vs)
        den = _to_poly(1 if den is None else den, vs if vs is not None else num.variables)
        allv = _merge_vars(num.variables, den.variables)
        if vs is not None:
            allv = _merge_vars(vs, allv) if allv else vs
        if num.variables != allv:
            num = num.with_variables(allv)
        if den.variables != allv:
            den = den.with_variables(allv)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        self.num, self.den = _canonical(num, den)

    @classmethod
    def _raw(cls, num: Polynomial, den: Polynomial) -> "RationalFunction":
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        return obj

    @classmethod
    def from_poly(cls, p: Polynomial) -> "RationalFunction":
        return cls._raw(p, Polynomial.constant(1, p.variables))

    @classmethod
    def constant(cls, c, variables: Iterable[str] = ()) -> "RationalFunction":
        vs = tuple(variables)
        return cls._raw(Polynomial.constant(c, vs), Polynomial.constant(1, vs))

    @classmethod
    def var(cls, name: str, variables: Iterable[str]) -> "RationalFunction":
        return cls.from_poly(Polynomial.var(name, variables))

    @property
    def variables(self) -> tuple:
        return self.num.variables

    def with_variables(self, variables) -> "RationalFunction":
        vs = tuple(variables)
        if vs == self.variables:
            return self
        return RationalFunction._raw(self.num.with_variables(vs), self.den.with_variables(vs))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.constant_value() is not None

    def as_polynomial(self) -> Polynomial | None:
        d = self.den.constant_value()
        if d is not None:
            return self.num * (1 / d)
        q = self.num.exact_div(self.den)
        return q

    def constant_value(self) -> Fraction | None:
        if self.num.is_zero():
            return Fraction(0)
        n = self.num.constant_value()
        d = self.den.constant_value()
        if n is not None and d is not None:
            return n / d
        q = self.num.exact_div(self.den)
        if q is not None:
            return q.constant_value()
        return None

    def used_variables(self) -> set:
        return self.num.used_variables() | self.den.used_variables()

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction.from_poly(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.constant(other, self.variables)
        return NotImplemented

    def _align(self, other: "RationalFunction"):
        vs = _merge_vars(self.variables, other.variables)
        return vs, self.with_variables(vs), other.with_variables(vs)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        vs, a, b = self._align(other)
        if a.den.terms == b.den.terms:
            return _make(a.num + b.num, a.den)
        q = b.den.exact_div(a.den) if len(b.den.terms) >= len(a.den.terms) else None
        if q is not None:
            return _make(a.num * q + b.num, b.den)
        q = a.den.exact_div(b.den)
        if q is not None:
            return _make(a.num + b.num * q, a.den)
        return _make(a.num * b.den + b.num * a.den, a.den * b.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._raw(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return RationalFunction.constant(0, self.variables)
            return RationalFunction._raw(self.num * other, self.den)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        vs, a, b = self._align(other)
        if a.num.is_zero() or b.num.is_zero():
            return RationalFunction.constant(0, vs)
        n1, d1, n2, d2 = a.num, a.den, b.num, b.den
        # cheap cross-cancellation before multiplying out
        if len(d2.terms) > 1:
            q = n1.exact_div(d2)
            if q is not None:
                n1, d2 = q, Polynomial.constant(1, vs)
        if len(d1.terms) > 1:
            q = n2.exact_div(d1)
            if q is not None:
                n2, d1 = q, Polynomial.constant(1, vs)
        return _make(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return _make(self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise ValueError("integer exponents only")
        if k < 0:
            return self.inverse() ** (-k)
        return RationalFunction._raw(self.num ** k, self.den ** k)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Polynomial)):
            other = self._coerce(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        try:
            _, a, b = self._align(other)
        except ChartMismatchError:
            return False
        if a.den.terms == b.den.terms:
            return a.num.terms == b.num.terms
        return (a.num * b.den - b.num * a.den).is_zero()

    def diff(self, v: str) -> "RationalFunction":
        dn = self.num.diff(v)
        dd = self.den.diff(v)
        if dd.is_zero():
            return _make(dn, self.den)
        return _make(dn * self.den - self.num * dd, self.den * self.den)

    def evaluate(self, point: Mapping[str, Scalar]) -> Fraction:
        d = self.den.evaluate(point)
        if not d:
            raise PoleError(f"denominator {self.den} vanishes at {dict(point)}")
        return self.num.evaluate(point) / d

    def substitute(self, values: Mapping[str, "RationalFunction"], variables: Iterable[str]) -> "RationalFunction":
        """Compose with rational-function values for every variable in use.

        The denominators of the substituted values are cleared to a common
        power first, so the work is done entirely with polynomials.
        """
        vs = tuple(variables)
        used = [i for i, v in enumerate(self.variables)
                if self.num.degree_in(i) or self.den.degree_in(i)]
        nums: dict = {}
        dens: dict = {}
        degs: dict = {}
        for i in used:
            v = self.variables[i]
            if v not in values:
                raise ValueError(f"no value supplied for {v!r}")
            r = values[v]
            if not isinstance(r, RationalFunction):
                r = RationalFunction(r, variables=vs) if not isinstance(r, (int, Fraction)) \
                    else RationalFunction.constant(r, vs)
            r = r.with_variables(vs) if r.variables != vs else r
            nums[i] = r.num
            dens[i] = r.den
            degs[i] = max(self.num.degree_in(i), self.den.degree_in(i))
        n = _subst_cleared(self.num, used, nums, dens, degs, vs)
        d = _subst_cleared(self.den, used, nums, dens, degs, vs)
        if d.is_zero():
            raise PoleError("substitution makes the denominator vanish identically")
        return _make(n, d)

    def __repr__(self):
        return f"RationalFunction({self.variables}, {str(self)!r})"

    def __str__(self):
        if self.den.constant_value() == 1:
            return format_poly(self.num)
        return f"({format_poly(self.num)}) : ({format_poly(self.den)})"


def _subst_cleared(p: Polynomial, used, nums, dens, degs, vs) -> Polynomial:
    cache: dict = {}

    def power(kind, i, k):
        key = (kind, i, k)
        r = cache.get(key)
        if r is None:
            base = nums[i] if kind == 0 else dens[i]
            r = base ** k
            cache[key] = r
        return r

    out = Polynomial._raw(vs, {})
    for e, c in p.terms.items():
        t = Polynomial.constant(c, vs)
        for i in used:
            k = e[i]
            if k:
                t = t * power(0, i, k)
            if degs[i] - k and dens[i].constant_value() != 1:
                t = t * power(1, i, degs[i] - k)
        out = out + t
    return out


def _to_poly(x, vs) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, RationalFunction):
        p = x.as_polynomial()
        if p is None:
            raise TypeError("nested rational function; divide instead")
        return p
    return Polynomial.constant(x, vs or ())


def _canonical(num: Polynomial, den: Polynomial):
    vs = num.variables
    if num.is_zero():
        one = Polynomial.constant(1, vs)
        return num, one
    # trial division both ways
    if len(den.terms) > 1:
        q = num.exact_div(den)
        if q is not None:
            num, den = q, Polynomial.constant(1, vs)
        elif len(num.terms) > 1:
            q = den.exact_div(num)
            if q is not None:
                num, den = Polynomial.constant(1, vs), q
    # common monomial factor
    if vs:
        mn = num.min_monomial()
        md = den.min_monomial()
        common = tuple(min(a, b) for a, b in zip(mn, md))
        if any(common):
            num = Polynomial._raw(vs, {tuple(x - y for x, y in zip(e, common)): c
                                       for e, c in num.terms.items()})
            den = Polynomial._raw(vs, {tuple(x - y for x, y in zip(e, common)): c
                                       for e, c in den.terms.items()})
    _, lc = den.leading()
    if lc != 1:
        inv = 1 / lc
        num = num * inv
        den = den * inv
    return num, den


def _make(num: Polynomial, den: Polynomial) -> RationalFunction:
    if den.is_zero():
        raise ZeroDivisionError("division by the zero function")
    n, d = _canonical(num, den)
    return RationalFunction._raw(n, d)


def ratfunc_arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    """Named dispatcher for the four field operations."""
    a = a if isinstance(a, RationalFunction) else RationalFunction(a)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        b = b if isinstance(b, RationalFunction) else a._coerce(b)
        if b.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def poly_diff(p: Polynomial, v: str) -> Polynomial:
    return p.diff(v)


def ratfunc_eval(f: RationalFunction, point: Mapping[str, Scalar]) -> Fraction:
    return f.evaluate(point)


# ---------------------------------------------------------------------------
# text grammar

class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9']*)|(?P<op>[-+*/^():]))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:pos + 1]!r} in {text!r}")
        pos = m.end()
        if m.group("num") is not None:
            out.append(("num", int(m.group("num"))))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
    return out


class _Parser:
    def __init__(self, text: str, variables: tuple | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.text = text
        self.variables = variables
        self.seen: list = []

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, op):
        t = self.take()
        if t != ("op", op):
            raise ParseError(f"expected {op!r} in {self.text!r}")

    # Values are built as dicts {exponent-by-name tuple: Fraction} first and
    # converted once the variable list is known.
    def expr(self):
        acc = None
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        t = self.term()
        acc = _pneg(t) if sign < 0 else t
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc = _padd(acc, _pneg(t) if op == "-" else t)
        return acc

    def term(self):
        acc = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            acc = _pmul(acc, self.factor())
        return acc

    def factor(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            num = val
            if self.peek() == ("op", "/"):
                self.take()
                k2, den = self.take()
                if k2 != "num" or den == 0:
                    raise ParseError(f"bad rational denominator in {self.text!r}")
                return {(): Fraction(num, den)}
            return {(): Fraction(num)}
        if kind == "name":
            self.take()
            if self.variables is not None and val not in self.variables:
                raise ParseError(f"unknown variable {val!r} (chart: {' '.join(self.variables)})")
            if val not in self.seen:
                self.seen.append(val)
            k = 1
            if self.peek() == ("op", "^"):
                self.take()
                k2, k = self.take()
                if k2 != "num":
                    raise ParseError(f"exponent must be an unsigned integer in {self.text!r}")
            return {((val, k),) if k else (): Fraction(1)}
        if (kind, val) == ("op", "("):
            self.take()
            inner = self.expr()
            self.expect(")")
            if self.peek() == ("op", "^"):
                self.take()
                k2, k = self.take()
                if k2 != "num":
                    raise ParseError(f"exponent must be an unsigned integer in {self.text!r}")
                out = {(): Fraction(1)}
                for _ in range(k):
                    out = _pmul(out, inner)
                return out
            return inner
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


def _pneg(a):
    return {k: -v for k, v in a.items()}


def _padd(a, b):
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, 0) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _mono_mul(m1, m2):
    d = dict(m1)
    for v, k in m2:
        d[v] = d.get(v, 0) + k
    return tuple(sorted(d.items()))


def _pmul(a, b):
    out: dict = {}
    for k1, v1 in a.items():
        for k2, v2 in b.items():
            k = _mono_mul(k1, k2)
            s = out.get(k, 0) + v1 * v2
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def _to_polynomial(d: dict, vs: tuple) -> Polynomial:
    pos = {v: i for i, v in enumerate(vs)}
    terms = {}
    for mono, c in d.items():
        e = [0] * len(vs)
        for v, k in mono:
            e[pos[v]] += k
        terms[tuple(e)] = c
    return Polynomial(vs, terms)


def parse_rational_function(text: str, variables: Iterable[str] | None = None) -> RationalFunction:
    """Parse ``expr`` or ``expr : expr`` on the given variables.

    If ``variables`` is None the names are taken in sorted order of use.
    """
    vs = tuple(variables) if variables is not None else None
    parts = _split_top_colon(text)
    if len(parts) > 2:
        raise ParseError(f"at most one ':' allowed in {text!r}")
    parsed = []
    seen: list = []
    for part in parts:
        if not part.strip():
            raise ParseError(f"empty expression in {text!r}")
        p = _Parser(part, vs)
        val = p.expr()
        if p.i != len(p.toks):
            raise ParseError(f"trailing input {p.toks[p.i][1]!r} in {text!r}")
        parsed.append(val)
        for v in p.seen:
            if v not in seen:
                seen.append(v)
    if vs is None:
        vs = tuple(sorted(seen))
    num = _to_polynomial(parsed[0], vs)
    den = _to_polynomial(parsed[1], vs) if len(parsed) == 2 else Polynomial.constant(1, vs)
    if den.is_zero():
        raise ParseError(f"zero denominator in {text!r}")
    return RationalFunction(num, den)


def parse_polynomial(text: str, variables: Iterable[str] | None = None) -> Polynomial:
    rf = parse_rational_function(text, variables)
    p = rf.as_polynomial()
    if p is None:
        raise ParseError(f"expected a polynomial, got {text!r}")
    return p


def _split_top_colon(text: str) -> list:
    depth = 0
    parts = []
    cur = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced parentheses in {text!r}")
        if ch == ":" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur))
    return parts


def isqrt_fraction(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None if irrational."""
    from math import isqrt

    q = as_fraction(q)
    if q < 0:
        return None
    a, b = q.numerator, q.denominator
    ra, rb = isqrt(a), isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None
