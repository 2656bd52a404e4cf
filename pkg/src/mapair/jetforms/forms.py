"""Differential forms and vector fields on named charts.

Coefficients are :class:`RationalFunction` values on the chart's coordinate
names.  Term keys are strictly increasing 0-based coordinate index tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .._backend import merge_sign, wedge_terms
from ..exterior import ExteriorForm, Vector
from ..scalar import (
    ChartMismatchError,
    Polynomial,
    PoleError,
    RationalFunction,
)

RF = RationalFunction


@dataclass(frozen=True)
class Chart:
    coordinates: tuple

    def __post_init__(self):
        coords = tuple(self.coordinates)
        object.__setattr__(self, "coordinates", coords)
        if not coords:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(coords)) != len(coords):
            raise ValueError(f"repeated coordinate names in {coords}")

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def index(self, name: str) -> int:
        try:
            return self.coordinates.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a coordinate of chart {self.coordinates}") from None

    def rf(self, x) -> RationalFunction:
        """Coerce a scalar, polynomial or rational function onto this chart."""
        return _coerce_rf(self, x)

    def var(self, name: str) -> RationalFunction:
        self.index(name)
        return RationalFunction.var(name, self.coordinates)

    def d(self, name: str) -> "DiffForm":
        return DiffForm(self, 1, {(self.index(name),): self.rf(1)})

    def function(self, f) -> "DiffForm":
        return DiffForm(self, 0, {(): self.rf(f)})

    def coordinate_field(self, name: str) -> "VecField":
        return VecField(self, {name: self.rf(1)})


def _used_names(f: RationalFunction) -> set:
    vs = f.variables
    out = set()
    for i, v in enumerate(vs):
        if f.num.degree_in(i) or f.den.degree_in(i):
            out.add(v)
    return out


def _coerce_rf(chart: Chart, x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        if x.variables == chart.coordinates:
            return x
        bad = _used_names(x) - set(chart.coordinates)
        if bad:
            raise ChartMismatchError(f"coefficient uses {sorted(bad)} outside chart {chart.coordinates}")
        return x.with_variables(chart.coordinates)
    if isinstance(x, Polynomial):
        return _coerce_rf(chart, RationalFunction.from_poly(x))
    return RationalFunction.constant(Fraction(x), chart.coordinates)


class DiffForm:
    """A k-form sum c_I dx^I with rational-function coefficients."""

    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: Chart, degree: int, terms: Mapping | None = None):
        self.chart = chart
        self.degree = degree
        out = {}
        for key, c in (terms or {}).items():
            key = tuple(key)
            if len(key) != degree:
                raise ValueError(f"term {key} does not have degree {degree}")
            if any(not 0 <= i < chart.dim for i in key):
                raise ValueError(f"index out of range in {key}")
            if len(set(key)) != len(key):
                continue
            order = sorted(range(len(key)), key=lambda j: key[j])
            skey = tuple(key[j] for j in order)
            sign = _perm_parity(order)
            c = _coerce_rf(chart, c)
            if sign < 0:
                c = -c
            prev = out.get(skey)
            c = c if prev is None else prev + c
            if c:
                out[skey] = c
            else:
                out.pop(skey, None)
        self.terms = out

    @classmethod
    def _raw(cls, chart: Chart, degree: int, terms: dict) -> "DiffForm":
        obj = cls.__new__(cls)
        obj.chart = chart
        obj.degree = degree
        obj.terms = {k: v for k, v in terms.items() if v}
        return obj

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "DiffForm":
        return cls._raw(chart, degree, {})

    @classmethod
    def from_names(cls, chart: Chart, terms: Mapping) -> "DiffForm":
        """Build from ``{("x1", "z"): coeff, ...}``; all keys share one degree."""
        degs = {len(k) for k in terms}
        if len(degs) > 1:
            raise ValueError("mixed degrees")
        deg = degs.pop() if degs else 0
        return cls(chart, deg, {tuple(chart.index(n) for n in k): c for k, c in terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other: "DiffForm"):
        if not isinstance(other, DiffForm):
            return NotImplemented
        if other.chart != self.chart:
            raise ChartMismatchError(f"charts differ: {self.chart.coordinates} vs {other.chart.coordinates}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out[k] + v if k in out else v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return DiffForm._raw(self.chart, self.degree, out)

    def __neg__(self):
        return DiffForm._raw(self.chart, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def scale(self, f) -> "DiffForm":
        f = _coerce_rf(self.chart, f)
        if not f:
            return DiffForm.zero(self.chart, self.degree)
        return DiffForm._raw(self.chart, self.degree, {k: v * f for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, DiffForm):
            return wedge(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        if other.chart != self.chart or other.degree != self.degree:
            return False
        if self.terms.keys() != other.terms.keys():
            return False
        return all(self.terms[k] == other.terms[k] for k in self.terms)

    __hash__ = None

    def coefficient(self, names) -> RationalFunction:
        """Coefficient of d(names[0])^...; sign-adjusted for unsorted names."""
        idx = [self.chart.index(n) for n in names]
        if len(set(idx)) != len(idx):
            return self.chart.rf(0)
        order = sorted(range(len(idx)), key=lambda j: idx[j])
        c = self.terms.get(tuple(idx[j] for j in order))
        if c is None:
            return self.chart.rf(0)
        return c if _perm_parity(order) > 0 else -c

    def named_terms(self) -> dict:
        cs = self.chart.coordinates
        return {tuple(cs[i] for i in k): v for k, v in self.terms.items()}

    def at(self, point: Mapping) -> ExteriorForm:
        """Constant-coefficient form at a point (raises PoleError on poles)."""
        terms = {tuple(i + 1 for i in k): v.evaluate(point) for k, v in self.terms.items()}
        return ExteriorForm(self.chart.dim, self.degree, terms)

    def __repr__(self):
        return f"DiffForm({self.chart.coordinates}, {format_diffform(self)!r})"

    def __str__(self):
        return format_diffform(self)


def _perm_parity(order) -> int:
    seen = [False] * len(order)
    sign = 1
    for i in range(len(order)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def format_diffform(w: DiffForm) -> str:
    if not w.terms:
        return "0"
    cs = w.chart.coordinates
    parts = []
    for k in sorted(w.terms):
        mono = "^".join("d" + cs[i] for i in k) if k else "1"
        parts.append(f"({w.terms[k]}) {mono}")
    return " + ".join(parts)


@dataclass(eq=False)
class VecField:
    chart: Chart
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        comps = {}
        for name, c in self.components.items():
            self.chart.index(name)
            c = _coerce_rf(self.chart, c)
            if c:
                comps[name] = c
        self.components = comps

    def component(self, name: str) -> RationalFunction:
        return self.components.get(name, self.chart.rf(0))

    def __add__(self, other: "VecField") -> "VecField":
        if other.chart != self.chart:
            raise ChartMismatchError("charts differ")
        out = dict(self.components)
        for k, v in other.components.items():
            out[k] = out[k] + v if k in out else v
        return VecField(self.chart, out)

    def __neg__(self):
        return VecField(self.chart, {k: -v for k, v in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "VecField":
        f = _coerce_rf(self.chart, f)
        return VecField(self.chart, {k: v * f for k, v in self.components.items()})

    def __rmul__(self, f):
        return self.scale(f)

    def __eq__(self, other):
        if not isinstance(other, VecField) or other.chart != self.chart:
            return NotImplemented
        names = set(self.components) | set(other.components)
        return all(self.component(n) == other.component(n) for n in names)

    __hash__ = None

    def apply(self, f) -> RationalFunction:
        """Directional derivative v(f)."""
        f = _coerce_rf(self.chart, f)
        out = self.chart.rf(0)
        for name, c in self.components.items():
            out = out + c * f.diff(name)
        return out

    def at(self, point: Mapping) -> Vector:
        return Vector(self.chart.dim, [self.component(n).evaluate(point) for n in self.chart.coordinates])

    def __str__(self):
        if not self.components:
            return "0"
        cs = self.chart.coordinates
        parts = [f"({self.components[n]}) d/d{n}" for n in cs if n in self.components]
        return " + ".join(parts)


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    if a.chart != b.chart:
        raise ChartMismatchError("cannot wedge forms on different charts")
    if a.degree + b.degree > a.chart.dim:
        return DiffForm.zero(a.chart, a.degree + b.degree)
    return DiffForm._raw(a.chart, a.degree + b.degree, wedge_terms(a.terms, b.terms))


def wedge_all(forms, chart: Chart | None = None) -> DiffForm:
    forms = list(forms)
    if not forms:
        if chart is None:
            raise ValueError("empty wedge needs a chart")
        return chart.function(1)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def exterior_d(w: DiffForm) -> DiffForm:
    chart = w.chart
    if w.degree >= chart.dim:
        return DiffForm.zero(chart, w.degree + 1)
    out: dict = {}
    for key, c in w.terms.items():
        for j, name in enumerate(chart.coordinates):
            if j in key:
                continue
            dc = c.diff(name)
            if not dc:
                continue
            s = merge_sign((j,), key)
            nk = tuple(sorted((j,) + key))
            val = dc if s > 0 else -dc
            prev = out.get(nk)
            val = val if prev is None else prev + val
            if val:
                out[nk] = val
            else:
                out.pop(nk, None)
    return DiffForm._raw(chart, w.degree + 1, out)


def interior_field(v: VecField, w: DiffForm) -> DiffForm:
    if v.chart != w.chart:
        raise ChartMismatchError("vector field and form live on different charts")
    if w.degree == 0:
        raise ValueError("interior product of a function")
    cs = w.chart.coordinates
    out: dict = {}
    for key, c in w.terms.items():
        for r, i in enumerate(key):
            vi = v.components.get(cs[i])
            if vi is None:
                continue
            nk = key[:r] + key[r + 1:]
            val = c * vi
            if r % 2:
                val = -val
            prev = out.get(nk)
            val = val if prev is None else prev + val
            if val:
                out[nk] = val
            else:
                out.pop(nk, None)
    return DiffForm._raw(w.chart, w.degree - 1, out)


def evaluate_on_fields(w: DiffForm, fields) -> RationalFunction:
    """ω(v1, ..., vk) as a rational function."""
    fields = list(fields)
    if len(fields) != w.degree:
        raise ValueError("need exactly degree-many vector fields")
    out = w
    for v in fields:
        out = interior_field(v, out)
    return out.terms.get((), w.chart.rf(0))


@dataclass(frozen=True, eq=False)
class PointMap:
    source: Chart
    target: Chart
    components: dict

    def __post_init__(self):
        comps = {}
        for name in self.target.coordinates:
            if name not in self.components:
                raise ValueError(f"target coordinate {name!r} is not assigned")
            comps[name] = _coerce_rf(self.source, self.components[name])
        extra = set(self.components) - set(self.target.coordinates)
        if extra:
            raise ValueError(f"unknown target coordinates {sorted(extra)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def identity(cls, chart: Chart) -> "PointMap":
        return cls(chart, chart, {n: chart.var(n) for n in chart.coordinates})

    def compose_function(self, f: RationalFunction) -> RationalFunction:
        f = _coerce_rf(self.target, f)
        return f.substitute(self.components, self.source.coordinates)

    def compose(self, inner: "PointMap") -> "PointMap":
        """self ∘ inner."""
        if inner.target != self.source:
            raise ChartMismatchError("maps do not compose")
        return PointMap(inner.source, self.target,
                        {n: inner.compose_function(c) for n, c in self.components.items()})

    def jacobian(self) -> list:
        """Rows indexed by target coordinates, columns by source coordinates."""
        return [[self.components[t].diff(s) for s in self.source.coordinates]
                for t in self.target.coordinates]

    def at(self, point: Mapping) -> dict:
        return {n: c.evaluate(point) for n, c in self.components.items()}

    def __str__(self):
        return "; ".join(f"{n} <- {self.components[n]}" for n in self.target.coordinates)


def pullback(phi: PointMap, w: DiffForm) -> DiffForm:
    if w.chart != phi.target:
        raise ChartMismatchError(
            f"form chart {w.chart.coordinates} is not the map target {phi.target.coordinates}")
    src = phi.source
    if w.degree == 0:
        c = w.terms.get(())
        return DiffForm._raw(src, 0, {} if c is None else {(): phi.compose_function(c)})
    jac = phi.jacobian()
    cov = [{(j,): x for j, x in enumerate(row) if x} for row in jac]
    memo: dict = {(): {(): src.rf(1)}}

    def prefix(idx: tuple) -> dict:
        r = memo.get(idx)
        if r is None:
            r = wedge_terms(prefix(idx[:-1]), cov[idx[-1]])
            memo[idx] = r
        return r

    out: dict = {}
    for key in sorted(w.terms):
        block = prefix(key)
        if not block:
            continue
        try:
            c = phi.compose_function(w.terms[key])
        except PoleError as exc:
            raise PoleError(f"pole on chart while pulling back the d{key} coefficient: {exc}") from None
        for k, v in block.items():
            val = c * v
            prev = out.get(k)
            val = val if prev is None else prev + val
            if val:
                out[k] = val
            else:
                out.pop(k, None)
    return DiffForm._raw(src, w.degree, out)


def substitute_differential(w: DiffForm, name: str, sigma: DiffForm) -> DiffForm:
    """Replace d(name) by the one-form sigma everywhere in w."""
    j = w.chart.index(name)
    if sigma.degree != 1:
        raise ValueError("replacement must be a one-form")
    keep: dict = {}
    out = DiffForm.zero(w.chart, w.degree)
    for key, c in w.terms.items():
        if j not in key:
            keep[key] = c
            continue
        r = key.index(j)
        rest = DiffForm._raw(w.chart, w.degree - 1, {key[:r] + key[r + 1:]: c if r % 2 == 0 else -c})
        out = out + wedge(sigma, rest)
    return out + DiffForm._raw(w.chart, w.degree, keep)
