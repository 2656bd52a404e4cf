"""Model Monge-Ampere systems: flat, Euclidean, spherical and hyperbolic.

The curved models live in ambient coordinates (x; y) with their defining
constraint polynomials attached; solutions are checked along explicit
rational parametrizations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..exterior import InconsistencyError
from ..scalar import RationalFunction
from .forms import Chart, DiffForm, PointMap, VecField, interior_field, pullback, wedge_all
from .systems import (
    MASystem,
    p_names,
    reduce_mod_theta,
    standard_chart,
    standard_frames,
    substitute_differential,
    theta_standard,
    volume,
    x_names,
)

KINDS = ("flat", "euclidean", "spherical", "hyperbolic")


@dataclass(frozen=True)
class Geometry:
    kind: str
    c: Fraction
    n: int

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in KINDS:
            raise ValueError(f"unknown geometry {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c == 0:
            raise ValueError("c must be a nonzero constant")
        if self.n < 2:
            raise ValueError("n must be at least 2")


def flat(c, n: int) -> Geometry:
    return Geometry("flat", c, n)


def euclidean(c, n: int) -> Geometry:
    return Geometry("euclidean", c, n)


def spherical(c, n: int) -> Geometry:
    return Geometry("spherical", c, n)


def hyperbolic(c, n: int) -> Geometry:
    return Geometry("hyperbolic", c, n)


def model_system(geom: Geometry) -> MASystem:
    return {
        "flat": _flat,
        "euclidean": _euclidean,
        "spherical": _spherical,
        "hyperbolic": _hyperbolic,
    }[geom.kind](geom.c, geom.n)


def _flat(c: Fraction, n: int) -> MASystem:
    ch = standard_chart(n)
    omega = volume(ch, x_names(n)).scale(c) - volume(ch, p_names(n))
    return MASystem(ch, theta_standard(n), omega, pair_frames=standard_frames(n),
                    name=f"Flat({c}, {n})")


def ambient_chart(first: int, last: int) -> Chart:
    xs = [f"x{i}" for i in range(first, last + 1)]
    ys = [f"y{i}" for i in range(first, last + 1)]
    return Chart(tuple(xs + ys))


def _omit(names: list, *drop) -> list:
    return [v for i, v in enumerate(names) if i not in drop]


def _euclidean(c: Fraction, n: int) -> MASystem:
    ch = ambient_chart(1, n + 1)
    xs = [f"x{i}" for i in range(1, n + 2)]
    ys = [f"y{i}" for i in range(1, n + 2)]
    theta = DiffForm.zero(ch, 1)
    for x, y in zip(xs, ys):
        theta = theta + ch.d(x).scale(ch.var(y))
    omega = DiffForm.zero(ch, n)
    for i in range(n + 1):
        sign = 1 if i % 2 == 0 else -1
        yi = ch.var(ys[i])
        omega = omega + volume(ch, _omit(xs, i)).scale(yi * (sign * c))
        omega = omega - volume(ch, _omit(ys, i)).scale(yi * sign)
    norm = ch.rf(-1)
    for y in ys:
        norm = norm + ch.var(y) * ch.var(y)
    return MASystem(ch, theta, omega, constraints=(norm,), name=f"Euclidean({c}, {n})")


def _pair_sums(ch: Chart, us: list, vs: list, j_start: int) -> DiffForm:
    """sum_{j<i} (-1)^{i+j} u_i v_j du^(j,i omitted) - sum_{j_start<=i<k} (-1)^{i+k} u_i v_k du^(i,k omitted)."""
    m = len(us)
    out = DiffForm.zero(ch, m - 2)
    for i in range(m):
        for j in range(i):
            sign = 1 if (i + j) % 2 == 0 else -1
            out = out + volume(ch, _omit(us, j, i)).scale(ch.var(us[i]) * ch.var(vs[j]) * sign)
    for i in range(j_start, m):
        for k in range(i + 1, m):
            sign = 1 if (i + k) % 2 == 0 else -1
            out = out - volume(ch, _omit(us, i, k)).scale(ch.var(us[i]) * ch.var(vs[k]) * sign)
    return out


def _spherical(c: Fraction, n: int) -> MASystem:
    ch = ambient_chart(0, n + 1)
    xs = [f"x{i}" for i in range(0, n + 2)]
    ys = [f"y{i}" for i in range(0, n + 2)]
    theta = DiffForm.zero(ch, 1)
    for x, y in zip(xs, ys):
        theta = theta + ch.d(x).scale(ch.var(y))
    omega = _pair_sums(ch, xs, ys, 0).scale(c) + _pair_sums(ch, ys, xs, 0)
    xx, yy, xy = ch.rf(-1), ch.rf(-1), ch.rf(0)
    for x, y in zip(xs, ys):
        X, Y = ch.var(x), ch.var(y)
        xx, yy, xy = xx + X * X, yy + Y * Y, xy + X * Y
    return MASystem(ch, theta, omega, constraints=(xx, yy, xy), name=f"Spherical({c}, {n})")


def _hyperbolic(c: Fraction, n: int) -> MASystem:
    ch = ambient_chart(0, n + 1)
    xs = [f"x{i}" for i in range(0, n + 2)]
    ys = [f"y{i}" for i in range(0, n + 2)]
    theta = ch.d(xs[0]).scale(-ch.var(ys[0]))
    for x, y in zip(xs[1:], ys[1:]):
        theta = theta + ch.d(x).scale(ch.var(y))

    def lead(us, vs):
        out = DiffForm.zero(ch, n)
        for i in range(1, n + 2):
            sign = 1 if i % 2 == 0 else -1
            out = out + volume(ch, _omit(us, 0, i)).scale(ch.var(us[0]) * ch.var(vs[i]) * sign)
        return out

    omega = (lead(xs, ys) + _pair_sums(ch, xs, ys, 1)).scale(c) + lead(ys, xs) + _pair_sums(ch, ys, xs, 1)
    x0, y0 = ch.var("x0"), ch.var("y0")
    xx, yy, xy = -x0 * x0 + 1, -y0 * y0 - 1, -x0 * y0
    for x, y in zip(xs[1:], ys[1:]):
        X, Y = ch.var(x), ch.var(y)
        xx, yy, xy = xx + X * X, yy + Y * Y, xy + X * Y
    return MASystem(ch, theta, omega, constraints=(xx, yy, xy), name=f"Hyperbolic({c}, {n})")


def model_reeb(geom: Geometry) -> VecField:
    """The Reeb fields of the ambient models (tautological for Euclidean)."""
    sys = model_system(geom)
    ch = sys.chart
    if geom.kind == "flat":
        return ch.coordinate_field("z")
    first = 1 if geom.kind == "euclidean" else 0
    comps = {}
    for i in range(first, geom.n + 2):
        comps[f"x{i}"] = ch.var(f"y{i}")
        if geom.kind == "spherical":
            comps[f"y{i}"] = -ch.var(f"x{i}")
        elif geom.kind == "hyperbolic":
            comps[f"y{i}"] = ch.var(f"x{i}")
    return VecField(ch, comps)


def model_construction(geom: Geometry) -> DiffForm:
    """i_R(pi1* Omega1 - pi2* Omega2) computed directly in ambient coordinates.

    Independent of the transcribed generators in :func:`model_system`; used to
    cross-check them.
    """
    c, n = geom.c, geom.n
    sys = model_system(geom)
    ch = sys.chart
    R = model_reeb(geom)
    if geom.kind == "flat":
        return sys.omega
    if geom.kind == "euclidean":
        xs = [f"x{i}" for i in range(1, n + 2)]
        ys = [f"y{i}" for i in range(1, n + 2)]
        om1 = volume(ch, xs).scale(c)
        xy = ch.rf(0)
        for x, y in zip(xs, ys):
            xy = xy + ch.var(x) * ch.var(y)
        dxy = DiffForm.zero(ch, 1)
        for x, y in zip(xs, ys):
            dxy = dxy + ch.d(x).scale(ch.var(y)) + ch.d(y).scale(ch.var(x))
        area = DiffForm.zero(ch, n)
        for i, y in enumerate(ys):
            sign = 1 if i % 2 == 0 else -1
            area = area + volume(ch, _omit(ys, i)).scale(ch.var(y) * sign)
        om2 = wedge_all([dxy, area])
        return interior_field(R, om1 - om2)
    xs = [f"x{i}" for i in range(0, n + 2)]
    ys = [f"y{i}" for i in range(0, n + 2)]
    sgn0 = -1 if geom.kind == "hyperbolic" else 1
    X = VecField(ch, {x: ch.var(x) * (sgn0 if i == 0 else 1) for i, x in enumerate(xs)})
    Y = VecField(ch, {y: ch.var(y) * (sgn0 if i == 0 else 1) for i, y in enumerate(ys)})
    om1 = interior_field(X, volume(ch, xs)).scale(c)
    om2 = interior_field(Y, volume(ch, ys))
    return interior_field(R, om1 - om2)


# chart reduction of the Euclidean model

@dataclass
class ChartReduction:
    """Standard-chart form of the Euclidean model on y_{n+1} != 0.

    ``f`` and ``g`` describe c dx - g dp; for odd n, ``g`` is None since it
    involves a half-integer power of rho = 1 + |p|^2, and only ``g_squared``
    is reported.
    """

    n: int
    c: Fraction
    f: RationalFunction
    g: RationalFunction | None
    g_squared: RationalFunction
    system: MASystem | None


def _rho(n: int, vs: tuple) -> RationalFunction:
    rho = RationalFunction.constant(1, vs)
    for p in p_names(n):
        P = RationalFunction.var(p, vs)
        rho = rho + P * P
    return rho


def _split_even_odd(f: RationalFunction, n: int, s: str, out_vs: tuple):
    """Write f(s) as A + B s using s^2 = 1/rho; the denominator must be s-free."""
    vs = f.variables
    si = vs.index(s)
    if f.den.degree_in(si):
        raise InconsistencyError("unexpected s in a denominator")
    inv_rho = RationalFunction.constant(1, out_vs) / _rho(n, out_vs)
    den = RationalFunction.from_poly(f.den).with_variables(vs)
    keep = [v for v in vs if v != s]
    idx = [vs.index(v) for v in keep]
    A = RationalFunction.constant(0, out_vs)
    B = RationalFunction.constant(0, out_vs)
    from ..scalar import Polynomial

    for e, coef in f.num.terms.items():
        k = e[si]
        mono = Polynomial(out_vs, {tuple(e[i] for i in idx): coef})
        term = RationalFunction.from_poly(mono) * inv_rho ** (k // 2)
        if k % 2:
            B = B + term
        else:
            A = A + term
    d = den.substitute({v: RationalFunction.var(v, out_vs) for v in keep}, out_vs)
    return A / d, B / d


def euclidean_chart_map(n: int) -> PointMap:
    """(x, z, p, s) -> (x1..xn, z; -p s, s) into the Euclidean ambient chart.

    ``s`` stands for y_{n+1} and is tied to p by s^2 (1 + |p|^2) = 1.
    """
    src = Chart(tuple(x_names(n) + ["z"] + p_names(n) + ["s"]))
    tgt = ambient_chart(1, n + 1)
    s = src.var("s")
    comps = {f"x{i}": src.var(f"x{i}") for i in range(1, n + 1)}
    comps[f"x{n + 1}"] = src.var("z")
    for i in range(1, n + 1):
        comps[f"y{i}"] = -src.var(f"p{i}") * s
    comps[f"y{n + 1}"] = s
    return PointMap(src, tgt, comps)


def euclidean_chart_reduce(n: int, c=1) -> ChartReduction:
    """Pull the ambient Euclidean generator back to the standard chart.

    The ambient generator is pulled back along :func:`euclidean_chart_map`,
    ds is eliminated with s ds = -s^4 sum p dp, the result is reduced modulo
    theta_st, multiplied by (-1)^n s (which makes the dx coefficient c), and
    even powers of s are replaced using s^2 = 1/rho.
    """
    c = Fraction(c)
    model = model_system(euclidean(c, n))
    L = euclidean_chart_map(n)
    ext = L.source
    w = pullback(L, model.omega)
    th = pullback(L, model.theta)
    s = ext.var("s")
    ds = DiffForm.zero(ext, 1)
    for p in p_names(n):
        ds = ds + ext.d(p).scale(-s * s * s * ext.var(p))
    w = substitute_differential(w, "s", ds)
    th = substitute_differential(th, "s", ds)
    # theta pulls back to s * theta_st
    theta_st_ext = ext.d("z")
    for x, p in zip(x_names(n), p_names(n)):
        theta_st_ext = theta_st_ext - ext.d(x).scale(ext.var(p))
    if th != theta_st_ext.scale(s):
        raise InconsistencyError("ambient theta does not pull back to y_{n+1} theta_st")
    w = reduce_mod_theta(w, theta_st_ext).scale(s * (-1) ** n)
    std = standard_chart(n)
    vs = std.coordinates
    kx = tuple(ext.index(x) for x in x_names(n))
    kp = tuple(ext.index(p) for p in p_names(n))
    coeffs = {}
    for key, coef in w.terms.items():
        A, B = _split_even_odd(coef, n, "s", vs)
        if key not in (kx, kp):
            if A or B:
                raise InconsistencyError(f"unexpected surviving term {key}")
            continue
        coeffs[key] = (A, B)
    fA, fB = coeffs.get(kx, (std.rf(0), std.rf(0)))
    if fB or fA != std.rf(c):
        raise InconsistencyError("normalized dx coefficient is not c")
    gA, gB = coeffs.get(kp, (std.rf(0), std.rf(0)))
    gA, gB = -gA, -gB
    rho = _rho(n, vs)
    if n % 2 == 0:
        if gB:
            raise InconsistencyError("odd power of s survives for even n")
        g = gA
        g_sq = g * g
        omega = volume(std, x_names(n)).scale(c) - volume(std, p_names(n)).scale(g)
        system = MASystem(std, theta_standard(n), omega, pair_frames=standard_frames(n),
                          name=f"EuclideanChart({c}, {n})")
    else:
        if gA:
            raise InconsistencyError("even power of s survives for odd n")
        g = None
        g_sq = gB * gB / rho
        system = None
    return ChartReduction(n, c, std.rf(c), g, g_sq, system)


def euclidean_reduced_formula(n: int, c=1) -> MASystem:
    """c dx - (-1)^n rho^(-(n+2)/2) dp for even n."""
    if n % 2:
        raise ValueError("the closed formula is rational only for even n")
    std = standard_chart(n)
    rho = _rho(n, std.coordinates)
    g = (std.rf(1) / rho) ** ((n + 2) // 2)
    omega = volume(std, x_names(n)).scale(Fraction(c)) - volume(std, p_names(n)).scale(g)
    return MASystem(std, theta_standard(n), omega, pair_frames=standard_frames(n))


def sphere_lift(n: int, r, sign: int = 1) -> PointMap:
    """Stereographic radius-r sphere in E^{n+1} with unit normal y = sign x / r."""
    r = Fraction(r)
    src = Chart(tuple(f"u{i}" for i in range(1, n + 1)))
    tgt = ambient_chart(1, n + 1)
    q = src.rf(0)
    for u in src.coordinates:
        q = q + src.var(u) * src.var(u)
    inv = src.rf(1) / (q + 1)
    sigma = [src.var(u) * 2 * inv for u in src.coordinates] + [(q - 1) * inv]
    comps = {}
    for i, s in enumerate(sigma, start=1):
        comps[f"x{i}"] = s * r
        comps[f"y{i}"] = s * sign
    return PointMap(src, tgt, comps)
