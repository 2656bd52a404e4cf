"""Contact forms, Monge-Ampere systems and their classification.

The standard chart of dimension 2n+1 is ``x1..xn, z, p1..pn`` with the
contact form dz - sum p_i dx_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..exterior import InconsistencyError
from ..linalg import rank
from ..scalar import PoleError, Polynomial, RationalFunction
from .forms import (
    Chart,
    DiffForm,
    PointMap,
    VecField,
    evaluate_on_fields,
    exterior_d,
    interior_field,
    pullback,
    substitute_differential,
    wedge,
    wedge_all,
)


class NotContactError(ValueError):
    """The one-form is not a contact form on the chart."""


class NotLegendrianError(ValueError):
    def __init__(self, theta_pullback: DiffForm):
        super().__init__(f"map is not Legendrian: pullback of theta = {theta_pullback}")
        self.theta_pullback = theta_pullback


class ClassificationError(ValueError):
    """Input outside the domain of the Hesse classification."""


class ConstraintError(ValueError):
    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


# standard chart

def x_names(n: int) -> list:
    return [f"x{i}" for i in range(1, n + 1)]


def p_names(n: int) -> list:
    return [f"p{i}" for i in range(1, n + 1)]


def standard_chart(n: int) -> Chart:
    return Chart(tuple(x_names(n) + ["z"] + p_names(n)))


def standard_n(chart: Chart) -> int | None:
    """n if the chart is the standard one, else None."""
    m = chart.dim
    if m % 2 == 0:
        return None
    n = (m - 1) // 2
    return n if chart == standard_chart(n) else None


def theta_standard(n: int) -> DiffForm:
    ch = standard_chart(n)
    out = ch.d("z")
    for x, p in zip(x_names(n), p_names(n)):
        out = out - ch.d(x).scale(ch.var(p))
    return out


def standard_frames(n: int) -> tuple:
    """(X_i = d/dx_i + p_i d/dz, P_i = d/dp_i)."""
    ch = standard_chart(n)
    X = [VecField(ch, {x: 1, "z": ch.var(p)}) for x, p in zip(x_names(n), p_names(n))]
    P = [VecField(ch, {p: 1}) for p in p_names(n)]
    return X, P


def volume(chart: Chart, names) -> DiffForm:
    return wedge_all([chart.d(v) for v in names], chart)


# contact geometry

def is_contact(theta: DiffForm) -> bool:
    m = theta.chart.dim
    if theta.degree != 1 or m % 2 == 0:
        return False
    n = (m - 1) // 2
    dth = exterior_d(theta)
    top = theta
    for _ in range(n):
        top = wedge(top, dth)
    return not top.is_zero()


def _bareiss_solve(rows: list, nvars: int, chart: Chart):
    """Solve a (possibly overdetermined) system over the rational-function field.

    ``rows`` are lists of nvars+1 RationalFunctions (last entry the right-hand
    side).  Denominators are cleared row by row, then Bareiss fraction-free
    elimination runs on polynomials with exact division; the echelon form is
    back-substituted.  Returns None when the system is inconsistent or the
    solution is not unique.
    """
    vs = chart.coordinates
    M = []
    for row in rows:
        den = Polynomial.constant(1, vs)
        for x in row:
            d = x.den
            if d.constant_value() is None and den.exact_div(d) is None:
                den = den * d
        prow = []
        for x in row:
            q = (x.num * den).exact_div(x.den)
            if q is None:
                raise InconsistencyError("denominator clearing failed")
            prow.append(q)
        M.append(prow)
    nrows = len(M)
    prev = Polynomial.constant(1, vs)
    r = 0
    pivcols = []
    for col in range(nvars + 1):
        piv = None
        for i in range(r, nrows):
            if not M[i][col].is_zero():
                if piv is None or len(M[i][col].terms) < len(M[piv][col].terms):
                    piv = i
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pr = M[r]
        for i in range(r + 1, nrows):
            row = M[i]
            a = row[col]
            newrow = list(row)
            for j in range(col, nvars + 1):
                val = pr[col] * row[j] - a * pr[j]
                if not prev.constant_value() == 1:
                    q = val.exact_div(prev)
                    if q is None:
                        raise InconsistencyError("Bareiss division was not exact")
                    val = q
                newrow[j] = val
            for j in range(0, col):
                newrow[j] = Polynomial.constant(0, vs)
            M[i] = newrow
        prev = pr[col]
        pivcols.append(col)
        r += 1
        if r == nrows:
            break
    if nvars in pivcols or len(pivcols) < nvars:
        return None
    sol = [None] * nvars
    for i in range(len(pivcols) - 1, -1, -1):
        col = pivcols[i]
        acc = RationalFunction.from_poly(M[i][nvars])
        for j in range(col + 1, nvars):
            if not M[i][j].is_zero():
                acc = acc - RationalFunction.from_poly(M[i][j]) * sol[j]
        sol[col] = acc / RationalFunction.from_poly(M[i][col])
    return sol


def reeb_field(theta: DiffForm, frame=None) -> VecField:
    """The field R with i_R theta = 1 and i_R dtheta = 0.

    ``frame`` is accepted for interface symmetry; when given as the standard
    (X, P) frame and theta = rho * theta_st the result is compared with the
    closed formula of :func:`reeb_closed_formula`.
    """
    chart = theta.chart
    if theta.degree != 1:
        raise NotContactError("theta must be a one-form")
    m = chart.dim
    cs = chart.coordinates
    dth = exterior_d(theta)
    zero = chart.rf(0)
    rows = [[theta.terms.get((j,), zero) for j in range(m)] + [chart.rf(1)]]
    omega = [[zero] * m for _ in range(m)]
    for (a, b), c in dth.terms.items():
        omega[a][b] = c
        omega[b][a] = -c
    for k in range(m):
        rows.append([omega[j][k] for j in range(m)] + [zero])
    sol = _bareiss_solve(rows, m, chart)
    if sol is None:
        raise NotContactError("theta is not a contact form on this chart (Reeb system has no unique solution)")
    R = VecField(chart, {cs[j]: sol[j] for j in range(m)})
    if interior_field(R, theta).terms.get((), zero) != chart.rf(1) or not interior_field(R, dth).is_zero():
        raise InconsistencyError("Reeb solve does not satisfy its defining equations")
    if frame is not None:
        n = standard_n(chart)
        if n is None:
            raise ValueError("a frame is only supported on the standard chart")
        rho = theta.terms.get((chart.index("z"),), zero)
        if theta != theta_standard(n).scale(rho):
            raise ValueError("frame cross-check needs theta = rho * theta_st")
        if reeb_closed_formula(rho, n) != R:
            raise InconsistencyError("Reeb solve disagrees with the closed formula")
    return R


def reeb_closed_formula(rho, n: int) -> VecField:
    """(1/rho^2)[sum (P_i rho) X_i - sum (X_i rho) P_i + rho d/dz] for theta = rho theta_st."""
    chart = standard_chart(n)
    rho = chart.rf(rho)
    X, P = standard_frames(n)
    out = chart.coordinate_field("z").scale(rho)
    for Xi, Pi in zip(X, P):
        out = out + Xi.scale(Pi.apply(rho)) - Pi.scale(Xi.apply(rho))
    return out.scale(chart.rf(1) / (rho * rho))


# systems

@dataclass(eq=False)
class MASystem:
    chart: Chart
    theta: DiffForm
    omega: DiffForm
    pair_frames: tuple | None = None
    constraints: tuple = ()
    name: str = ""
    check: bool = True

    def __post_init__(self):
        if self.theta.chart != self.chart or self.omega.chart != self.chart:
            raise ValueError("theta and omega must live on the system chart")
        if self.theta.degree != 1:
            raise ValueError("theta must be a one-form")
        self.constraints = tuple(self.chart.rf(c) for c in self.constraints)
        if self.check and not self.constraints and not is_contact(self.theta):
            raise NotContactError("theta ^ (dtheta)^n vanishes identically: not a contact form")
        if self.check and self.pair_frames is not None:
            problems = self.frame_problems()
            if problems:
                raise ValueError("; ".join(problems))

    @property
    def n(self) -> int:
        return self.omega.degree

    def frame_problems(self) -> list:
        """Invariant violations of the attached Lagrangian-pair frames."""
        if self.pair_frames is None:
            return []
        out = []
        dth = exterior_d(self.theta)
        E1, E2 = self.pair_frames
        for label, frame in (("E1", E1), ("E2", E2)):
            for i, v in enumerate(frame):
                if evaluate_on_fields(self.theta, [v]):
                    out.append(f"theta does not vanish on {label}[{i}]")
            for i in range(len(frame)):
                for j in range(i + 1, len(frame)):
                    if evaluate_on_fields(dth, [frame[i], frame[j]]):
                        out.append(f"{label} is not dtheta-isotropic at ({i}, {j})")
        if len(E1) != len(E2):
            out.append("frames have different lengths")
        return out

    def pairing_matrix(self) -> list:
        dth = exterior_d(self.theta)
        E1, E2 = self.pair_frames
        return [[evaluate_on_fields(dth, [a, b]) for b in E2] for a in E1]

    def generates_same_ideal_as(self, other: "MASystem") -> bool:
        """Same theta up to a function and omega equal modulo theta up to a function."""
        if other.chart != self.chart:
            return False
        if proportionality_factor(self.theta, other.theta) is None:
            return False
        a = reduce_mod_theta(self.omega, self.theta)
        b = reduce_mod_theta(other.omega, self.theta)
        return proportionality_factor(a, b) is not None


def proportionality_factor(a: DiffForm, b: DiffForm):
    """r with b = r * a, or None."""
    if a.chart != b.chart or a.degree != b.degree:
        return None
    if a.terms.keys() != b.terms.keys():
        return None
    if not a.terms:
        return a.chart.rf(1)
    keys = sorted(a.terms)
    r = b.terms[keys[0]] / a.terms[keys[0]]
    for k in keys[1:]:
        if b.terms[k] != r * a.terms[k]:
            return None
    return r


def construct_ma(Omega1: DiffForm, Omega2: DiffForm, theta: DiffForm,
                 pi1: PointMap, pi2: PointMap, check: bool = True) -> MASystem:
    """omega = i_R(pi1* Omega1 - pi2* Omega2) with R the Reeb field of theta."""
    for label, Om, pi in (("Omega1", Omega1, pi1), ("Omega2", Omega2, pi2)):
        if Om.degree != Om.chart.dim:
            raise ValueError(f"{label} must be a top-degree form on its chart")
        if Om.is_zero():
            raise ValueError(f"{label} vanishes identically")
        if pi.source != theta.chart or pi.target != Om.chart:
            raise ValueError(f"{label}: projection charts do not match")
    if check and not is_contact(theta):
        raise NotContactError("theta is not a contact form")
    R = reeb_field(theta)
    total = pullback(pi1, Omega1) - pullback(pi2, Omega2)
    omega = interior_field(R, total)
    return MASystem(theta.chart, theta, omega, check=False)


def theta_independence(Omega1, Omega2, theta, pi1, pi2, rho) -> DiffForm:
    """omega(rho theta) - omega(theta)/rho reduced modulo theta (zero when independent)."""
    rho = theta.chart.rf(rho)
    a = construct_ma(Omega1, Omega2, theta, pi1, pi2).omega
    b = construct_ma(Omega1, Omega2, theta.scale(rho), pi1, pi2).omega
    return reduce_mod_theta(b - a.scale(theta.chart.rf(1) / rho), theta)


def _solved_coordinate(theta: DiffForm, solve_for: str | None) -> str:
    chart = theta.chart
    if solve_for is not None:
        if (chart.index(solve_for),) not in theta.terms:
            raise ValueError(f"theta has no d{solve_for} component to solve for")
        return solve_for
    if "z" in chart.coordinates and (chart.index("z"),) in theta.terms:
        return "z"
    raise ValueError("theta is not solvable for a coordinate differential; pass solve_for")


def reduce_mod_theta(w: DiffForm, theta: DiffForm, solve_for: str | None = None) -> DiffForm:
    """Rewrite w in a coframe containing theta and drop every theta term."""
    s = _solved_coordinate(theta, solve_for)
    j = theta.chart.index(s)
    a = theta.terms[(j,)]
    rest = DiffForm._raw(theta.chart, 1, {k: v for k, v in theta.terms.items() if k != (j,)})
    sigma = (-rest).scale(theta.chart.rf(1) / a)
    return substitute_differential(w, s, sigma)


# classification

@dataclass
class Classification:
    kind: str  # General | Hesse | EulerLagrange | Flat
    F: RationalFunction | None = None
    F1: RationalFunction | None = None
    F2: RationalFunction | None = None
    c: Fraction | None = None
    f: RationalFunction | None = None
    g: RationalFunction | None = None
    criteria: tuple = ()
    reason: str = ""

    def __str__(self):
        if self.kind == "Flat":
            return f"Flat({self.c})"
        if self.kind == "EulerLagrange":
            return f"EulerLagrange({self.F1}, {self.F2})"
        if self.kind == "Hesse":
            return f"Hesse({self.F})"
        return f"General ({self.reason})" if self.reason else "General"


def legendre_map(n: int) -> PointMap:
    """(x, z, p) -> (p, sum x_i p_i - z, x) on the standard chart."""
    ch = standard_chart(n)
    comps = {}
    zt = -ch.var("z")
    for x, p in zip(x_names(n), p_names(n)):
        comps[x] = ch.var(p)
        comps[p] = ch.var(x)
        zt = zt + ch.var(x) * ch.var(p)
    comps["z"] = zt
    return PointMap(ch, ch, comps)


def tilde_chart(n: int) -> tuple:
    return tuple(x_names(n) + ["zt"] + p_names(n))


def to_tilde(f: RationalFunction, n: int) -> RationalFunction:
    """Rewrite f(x, z, p) in coordinates (x, zt, p) with zt = sum x_i p_i - z."""
    vs = tilde_chart(n)
    vals = {}
    z = -RationalFunction.var("zt", vs)
    for x, p in zip(x_names(n), p_names(n)):
        vals[x] = RationalFunction.var(x, vs)
        vals[p] = RationalFunction.var(p, vs)
        z = z + vals[x] * vals[p]
    vals["z"] = z
    return f.substitute(vals, vs)


def bidecomposed_shape(w: DiffForm, n: int):
    """(f, g) if w = f dx1^..^dxn - g dp1^..^dpn exactly, else None."""
    ch = w.chart
    kx = tuple(ch.index(x) for x in x_names(n))
    kp = tuple(ch.index(p) for p in p_names(n))
    if set(w.terms) - {kx, kp}:
        return None
    return w.terms.get(kx, ch.rf(0)), -w.terms.get(kp, ch.rf(0))


def classify_hesse(sys: MASystem) -> Classification:
    n = standard_n(sys.chart)
    if n is None:
        return Classification("General", reason="system is not on the standard chart")
    ch = sys.chart
    w = reduce_mod_theta(sys.omega, sys.theta)
    shape = bidecomposed_shape(w, n)
    if shape is None:
        return Classification("General", reason="generator is not of the form f dx - g dp modulo theta")
    f, g = shape
    if g.is_zero():
        raise ClassificationError("g vanishes identically (F must be nonzero)")
    if f.is_zero():
        raise ClassificationError("f vanishes identically (F must be nonzero)")
    F = f / g
    # criterion A: coefficient independence
    a1 = all(f.diff(p).is_zero() for p in p_names(n))
    gt = to_tilde(g, n)
    a2 = all(gt.diff(x).is_zero() for x in x_names(n))
    crit_a = a1 and a2
    # criterion B: d(omega_i) = 0 modulo theta
    th = theta_standard(n)
    w1 = volume(ch, x_names(n)).scale(f)
    w2 = volume(ch, p_names(n)).scale(g)
    crit_b = reduce_mod_theta(exterior_d(w1), th).is_zero() and reduce_mod_theta(exterior_d(w2), th).is_zero()
    if crit_a != crit_b:
        raise InconsistencyError(f"Euler-Lagrange criteria disagree: coefficients {crit_a}, closedness {crit_b}")
    crit = (crit_a, crit_b)
    cval = F.constant_value()
    if cval is not None and cval != 0:
        return Classification("Flat", F=F, c=cval, f=f, g=g, criteria=crit)
    if crit_a:
        F1 = f.with_variables(tuple(x_names(n) + ["z"]))
        F2 = (RationalFunction.constant(1, gt.variables) / gt).with_variables(tuple(["zt"] + p_names(n)))
        return Classification("EulerLagrange", F=F, F1=F1, F2=F2, f=f, g=g, criteria=crit)
    return Classification("Hesse", F=F, f=f, g=g, criteria=crit)


def legendre_dual(sys: MASystem) -> MASystem:
    """Push the system through the Legendre involution.

    The involution pulls theta_st back to -theta_st, so both generators are
    negated to keep theta in standard form; the ideal is unchanged.
    """
    n = standard_n(sys.chart)
    if n is None:
        raise ValueError("Legendre duality needs the standard chart")
    phi = legendre_map(n)
    out = {}
    failures = []
    for label, form in (("theta", sys.theta), ("omega", sys.omega)):
        try:
            out[label] = -pullback(phi, form)
        except PoleError as exc:
            failures.append(f"{label}: {exc}")
    if failures:
        raise PoleError("; ".join(failures))
    frames = None
    if sys.pair_frames is not None:
        frames = standard_frames(n)
    return MASystem(sys.chart, out["theta"], out["omega"], pair_frames=frames,
                    name=f"dual({sys.name})" if sys.name else "dual")


# solutions

def legendrian_lift(f, n: int | None = None) -> PointMap:
    """x -> (x, f(x), grad f(x)) for f a polynomial (or rational function) in x1..xn."""
    if n is None:
        n = len(f.variables)
        if tuple(f.variables) != tuple(x_names(n)):
            raise ValueError("pass n explicitly when f is not on variables x1..xn")
    src = Chart(tuple(x_names(n)))
    fr = src.rf(f)
    comps = {x: src.var(x) for x in x_names(n)}
    comps["z"] = fr
    for x, p in zip(x_names(n), p_names(n)):
        comps[p] = fr.diff(x)
    L = PointMap(src, standard_chart(n), comps)
    if not pullback(L, theta_standard(n)).is_zero():
        raise InconsistencyError("graph lift is not Legendrian")
    return L


def check_constraints(sys: MASystem, L: PointMap):
    for i, c in enumerate(sys.constraints):
        r = L.compose_function(c)
        if r:
            raise ConstraintError(f"map leaves the constraint set (constraint {i}: {r})", r)


def verify_solution(sys: MASystem, L: PointMap) -> DiffForm:
    """L* omega, after checking that L is Legendrian (and on the constraint set)."""
    if L.target != sys.chart:
        raise ValueError("map target is not the system chart")
    check_constraints(sys, L)
    tp = pullback(L, sys.theta)
    if not tp.is_zero():
        raise NotLegendrianError(tp)
    return pullback(L, sys.omega)


def transversality_check(sys: MASystem, L: PointMap, point) -> tuple:
    """(E1 meets the tangent space trivially, E2 meets it trivially) at L(point)."""
    if sys.pair_frames is None:
        raise ValueError("system has no Lagrangian-pair frames")
    tp = pullback(L, sys.theta)
    if not tp.is_zero():
        raise NotLegendrianError(tp)
    point = {k: Fraction(v) for k, v in point.items()}
    image = L.at(point)
    jac = L.jacobian()
    tangent = [[jac[i][j].evaluate(point) for i in range(len(jac))] for j in range(len(L.source.coordinates))]
    rt = rank(tangent)
    out = []
    for frame in sys.pair_frames:
        vecs = [list(v.at(image).components) for v in frame]
        rf = rank(vecs)
        out.append(rank(vecs + tangent) == rf + rt)
    return tuple(out)


# symmetries

def flat_symmetry_map(ell, k, A, a, b, cprime) -> PointMap:
    from ..linalg import inverse, to_fraction_matrix

    A = to_fraction_matrix(A)
    n = len(A)
    ell, k, cprime = Fraction(ell), Fraction(k), Fraction(cprime)
    a = [Fraction(v) for v in a]
    b = [Fraction(v) for v in b]
    Ainv = inverse(A)
    ch = standard_chart(n)
    X = [ch.var(x) for x in x_names(n)]
    P = [ch.var(p) for p in p_names(n)]
    comps = {}
    for i, x in enumerate(x_names(n)):
        acc = ch.rf(b[i])
        for j in range(n):
            if A[i][j]:
                acc = acc + X[j] * A[i][j]
        comps[x] = acc * (1 / ell)
    zz = ch.var("z") * k - cprime
    for i in range(n):
        if a[i]:
            zz = zz - X[i] * a[i]
    comps["z"] = zz * (1 / ell)
    for j, p in enumerate(p_names(n)):
        acc = ch.rf(0)
        for i in range(n):
            if Ainv[i][j]:
                acc = acc + (P[i] * k - a[i]) * Ainv[i][j]
        comps[p] = acc
    return PointMap(ch, ch, comps)


@dataclass
class SymmetryResult:
    system: MASystem
    theta_scalar: RationalFunction | None
    omega_scalar: RationalFunction | None
    predicted: tuple = field(default=())


def apply_flat_symmetry(ell, k, A, a, b, cprime, sys: MASystem) -> SymmetryResult:
    from ..linalg import det_bareiss, to_fraction_matrix

    A = to_fraction_matrix(A)
    n = len(A)
    ell, k = Fraction(ell), Fraction(k)
    if not ell or not k:
        raise ConstraintError("l and k must be nonzero")
    detA = det_bareiss(A)
    if not detA:
        raise ConstraintError("A is singular")
    residual = detA ** 2 - (k * ell) ** n
    if residual:
        raise ConstraintError(f"(det A)^2 - (k l)^n = {residual} != 0", residual)
    if standard_n(sys.chart) != n:
        raise ValueError("system is not on the standard chart of matching dimension")
    psi = flat_symmetry_map(ell, k, A, a, b, cprime)
    th = pullback(psi, sys.theta)
    om = pullback(psi, sys.omega)
    st = proportionality_factor(sys.theta, th)
    so = proportionality_factor(sys.omega, om)
    new = MASystem(sys.chart, th, om, name=sys.name)
    return SymmetryResult(new, st, so, (k / ell, detA / ell ** n))
