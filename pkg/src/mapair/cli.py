"""Command-line front end.

Exit codes: 0 success, 1 verified negative, 2 precondition failure,
3 parse error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import bidecomp as bd
from .exterior import (
    ExteriorForm,
    FormParseError,
    Subspace,
    SymplecticSpace,
    Vector,
    format_terms,
    is_effective,
    parse_form,
    wedge,
)
from .jetforms import fileio, models, systems
from .jetforms.forms import Chart, PointMap
from .prolong import build_mg0, jacobi_check, prolong
from .scalar import ParseError, PoleError, parse_rational_function

OK, NEGATIVE, PRECONDITION, PARSE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


EXPLAIN = {
    "decompose": (
        "Recovers the splitting of an n-form into a difference of two decomposable forms "
        "living on a transversal pair of Lagrangian subspaces. For odd n the pair is "
        "computed from the form alone via the trace-square invariant of the Hitchin "
        "operator; for even n a hinted pair is validated instead."),
    "check": (
        "Tests effectiveness of a form twice (contraction with the bivector dual to the "
        "symplectic form, and vanishing of the wedge with the symplectic form) and tests "
        "decomposability by the Pluecker relations."),
    "prolong": (
        "Computes the Tanaka prolongation of the graded algebra g-2 + g-1 + g0 level by "
        "level; the total dimension bounds the symmetry algebra."),
    "construct": (
        "Builds omega = i_R(pi1* Omega1 - pi2* Omega2) from volume forms on the two "
        "leaf spaces and the Reeb field of the contact form; with --rho it also checks "
        "that rescaling theta only rescales omega modulo theta."),
    "classify": (
        "Reduces omega modulo theta to f dx - g dp and decides Flat (F = f/g constant), "
        "Euler-Lagrange (both summands closed modulo theta) or Hesse."),
    "dual": (
        "Pushes the system through the Legendre involution (x, z, p) -> (p, sum xp - z, x), "
        "which pulls theta back to -theta."),
    "verify": (
        "Pulls theta and omega back along the map; the map is a geometric solution iff "
        "both pullbacks vanish."),
    "symmetry": (
        "Applies a point transformation of the flat model's symmetry group and reports "
        "the scalars by which theta and omega are multiplied."),
}


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", PRECONDITION) from None


def _write_or_print(text: str, path: str | None, out):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {path}", file=out)
    else:
        out.write(text)


def _frac(text: str, what: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise CliError(f"cannot read {what} {text!r} as a rational number", PARSE) from None


def _vector(text: str, what: str) -> list:
    return [_frac(t, what) for t in text.replace(",", " ").split()]


def _matrix(text: str, what: str) -> list:
    return [_vector(row, what) for row in text.split(";") if row.strip()]


def parse_pair_hint(text: str, dim: int) -> tuple:
    """Lines ``V1 a1 a2 ...`` and ``V2 b1 b2 ...`` give basis vectors."""
    vecs: dict = {"V1": [], "V2": []}
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        head, *rest = s.split()
        if head not in vecs:
            raise ParseError(f"expected V1 or V2, got {head!r}", no)
        try:
            comps = [Fraction(t) for t in rest]
        except (ValueError, ZeroDivisionError):
            raise ParseError("bad rational entry", no) from None
        if len(comps) != dim:
            raise ParseError(f"expected {dim} entries, got {len(comps)}", no)
        vecs[head].append(Vector(dim, comps))
    if not vecs["V1"] or not vecs["V2"]:
        raise ParseError("hint needs both V1 and V2 lines")
    try:
        return Subspace(dim, tuple(vecs["V1"])), Subspace(dim, tuple(vecs["V2"]))
    except ValueError as exc:
        raise CliError(f"pair hint: {exc}", PRECONDITION) from None


def format_pair_hint(V1: Subspace, V2: Subspace) -> str:
    lines = []
    for label, V in (("V1", V1), ("V2", V2)):
        for v in V.basis:
            lines.append(label + " " + " ".join(str(x) for x in v.components))
    return "\n".join(lines) + "\n"


def _report_bd(d: bd.BiDecomposition, out):
    print(f"c = {d.c}", file=out)
    print(f"omega1 = {format_terms(d.omega1)}", file=out)
    print(f"omega2 = {format_terms(d.omega2)}", file=out)
    for label, V in (("V1", d.V1), ("V2", d.V2)):
        for v in V.basis:
            print(f"{label} " + " ".join(str(x) for x in v.components), file=out)


def _load_form(path: str) -> ExteriorForm:
    return parse_form(_read(path))


def cmd_decompose(args, out) -> int:
    w = _load_form(args.form)
    if w.dim % 2 or w.degree != w.dim // 2:
        raise CliError(f"expected an n-form on a 2n-dimensional space, got degree {w.degree} in dim {w.dim}",
                       PRECONDITION)
    n = w.degree
    S = SymplecticSpace.standard(n)
    hints = [parse_pair_hint(_read(p), w.dim) for p in (args.pair_hint or [])]
    print(f"n = {n}", file=out)
    accepted = []
    if hints:
        for path, (V1, V2) in zip(args.pair_hint, hints):
            try:
                d = bd.verify_bidecomposition(w, V1, V2, S)
            except bd.PreconditionError as exc:
                print(f"hint {path}: rejected ({exc})", file=out)
                continue
            except bd.NotBiDecomposableError as exc:
                print(f"hint {path}: rejected ({exc.condition})", file=out)
                continue
            print(f"hint {path}: accepted", file=out)
            if not any(d.same_up_to_swap(a) for a in accepted):
                accepted.append(d)
        if accepted:
            _report_bd(accepted[0], out)
        print(f"distinct pairs = {len(accepted)}", file=out)
    elif n % 2 == 0:
        raise CliError(
            "even n: the Hitchin operator is a multiple of the identity, so the pair cannot be "
            "recovered from the form alone; supply --pair-hint", PRECONDITION)
    else:
        try:
            d = bd.bidecompose_odd(w, S, branch=args.branch)
        except bd.NotBiDecomposableError as exc:
            print("not bi-decomposable over the rationals" if "rational" in str(exc)
                  else f"not bi-decomposable: {exc}", file=out)
            return NEGATIVE
        lam = bd.hitchin_operator(w, S.epsilon()).lam
        print(f"lambda = {lam}", file=out)
        _report_bd(d, out)
        accepted.append(d)
    if not accepted:
        print("not bi-decomposable on the hinted pairs", file=out)
        return NEGATIVE
    if args.trials:
        rep = bd.uniqueness_oracle(w, S, trials=args.trials, seed=args.seed, reference=accepted[0],
                                   candidates=[(h[0], h[1]) for h in hints] or None)
        print(f"uniqueness trials = {rep.trials}", file=out)
        print(f"uniqueness distinct pairs = {rep.distinct_pairs}", file=out)
        print(f"uniqueness only reference = {'yes' if rep.only_reference else 'no'}", file=out)
    return OK


def cmd_check(args, out) -> int:
    w = _load_form(args.form)
    if w.dim % 2:
        raise CliError("the ambient dimension must be even", PRECONDITION)
    S = SymplecticSpace.standard(w.dim // 2)
    eff = is_effective(w, S)
    print(f"effective: {'yes' if eff else 'no'}", file=out)
    if w.degree == S.n:
        wedge_zero = wedge(w, S.theta).is_zero()
        print(f"wedge with symplectic form vanishes: {'yes' if wedge_zero else 'no'}", file=out)
    print(f"decomposable: {'yes' if bd.is_decomposable(w) else 'no'}", file=out)
    return OK if eff else NEGATIVE


def cmd_prolong(args, out) -> int:
    if args.n < 2:
        raise CliError("n must be at least 2", PRECONDITION)
    try:
        g = build_mg0(args.n, args.variant)
    except ValueError as exc:
        raise CliError(str(exc), PRECONDITION) from None
    if not jacobi_check(g):
        print("Jacobi identity fails", file=out)
        return NEGATIVE
    _, res = prolong(g, max_level=args.max_level)
    if args.machine:
        for lvl in sorted(res.dims):
            print(f"k={lvl} dim={res.dims[lvl]}", file=out)
        print(f"total={res.total}", file=out)
        return OK
    print(f"variant = {g.variant}, n = {args.n}", file=out)
    print("level  dim", file=out)
    for lvl in sorted(res.dims):
        print(f"{lvl:>5}  {res.dims[lvl]}", file=out)
    print(f"total = {res.total}", file=out)
    return OK


def _standard_construction(n: int, f_text: str, g_text: str):
    ch = systems.standard_chart(n)
    xs, ps = systems.x_names(n), systems.p_names(n)
    W1 = Chart(tuple(xs + ["z"]))
    W2 = Chart(tuple(["zt"] + ps))
    f = parse_rational_function(f_text, W1.coordinates)
    g = parse_rational_function(g_text, W2.coordinates)
    O1 = systems.volume(W1, ["z"] + xs).scale(f)
    O2 = -systems.volume(W2, ["zt"] + ps).scale(g)
    pi1 = PointMap(ch, W1, {v: ch.var(v) for v in W1.coordinates})
    zt = -ch.var("z")
    for x, p in zip(xs, ps):
        zt = zt + ch.var(x) * ch.var(p)
    pi2 = PointMap(ch, W2, {"zt": zt, **{p: ch.var(p) for p in ps}})
    return O1, O2, systems.theta_standard(n), pi1, pi2


def cmd_construct(args, out) -> int:
    if args.n < 2:
        raise CliError("n must be at least 2", PRECONDITION)
    if args.model:
        c = _frac(args.c, "c")
        if args.model == "euclidean-chart":
            red = models.euclidean_chart_reduce(args.n, c)
            if red.system is None:
                print(f"odd n: g is irrational; g^2 = {red.g_squared}", file=out)
                return PRECONDITION
            sys_ = red.system
        else:
            try:
                sys_ = models.model_system(models.Geometry(args.model, c, args.n))
            except ValueError as exc:
                raise CliError(str(exc), PRECONDITION) from None
        _write_or_print(fileio.format_system(sys_), args.output, out)
        return OK
    O1, O2, theta, pi1, pi2 = _standard_construction(args.n, args.f, args.g)
    sys_ = systems.construct_ma(O1, O2, theta, pi1, pi2)
    _write_or_print(fileio.format_system(sys_), args.output, out)
    if args.rho:
        rho = parse_rational_function(args.rho, theta.chart.coordinates)
        diff = systems.theta_independence(O1, O2, theta, pi1, pi2, rho)
        ok = diff.is_zero()
        print(f"# theta-independence for rho = {rho}: {'holds' if ok else 'fails'}", file=out)
        return OK if ok else NEGATIVE
    return OK


def _load_system(path: str) -> systems.MASystem:
    return fileio.parse_system(_read(path))


def cmd_classify(args, out) -> int:
    sys_ = _load_system(args.system)
    try:
        cl = systems.classify_hesse(sys_)
    except systems.ClassificationError as exc:
        raise CliError(str(exc), PRECONDITION) from None
    print(cl.kind, file=out)
    print(f"classification = {cl}", file=out)
    if cl.F is not None:
        print(f"F = {cl.F}", file=out)
    if cl.criteria:
        a, b = cl.criteria
        print(f"coefficient criterion = {a}; closedness criterion = {b}", file=out)
    return OK


def cmd_dual(args, out) -> int:
    sys_ = _load_system(args.system)
    if systems.standard_n(sys_.chart) is None:
        raise CliError("Legendre duality needs the standard chart x1..xn z p1..pn", PRECONDITION)
    dual = systems.legendre_dual(sys_)
    text = fileio.format_system(dual)
    try:
        cl = systems.classify_hesse(dual)
        text += f"# classification: {cl}\n"
    except systems.ClassificationError:
        pass
    _write_or_print(text, args.output, out)
    return OK


def cmd_verify(args, out) -> int:
    sys_ = _load_system(args.system)
    spec = fileio.parse_map(_read(args.lift))
    try:
        L = spec.bind(sys_.chart)
    except ValueError as exc:
        raise CliError(str(exc), PRECONDITION) from None
    try:
        res = systems.verify_solution(sys_, L)
    except systems.NotLegendrianError as exc:
        print("not Legendrian", file=out)
        print(f"theta pullback = {exc.theta_pullback}", file=out)
        return PRECONDITION
    except systems.ConstraintError as exc:
        print(str(exc), file=out)
        return PRECONDITION
    print(f"residual = {res}", file=out)
    if res.is_zero():
        print("geometric solution: yes", file=out)
        return OK
    print("geometric solution: no", file=out)
    return NEGATIVE


def cmd_symmetry(args, out) -> int:
    sys_ = _load_system(args.system)
    n = systems.standard_n(sys_.chart)
    if n is None:
        raise CliError("the symmetry action needs the standard chart", PRECONDITION)
    A = _matrix(args.A, "A") if args.A else [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    a = _vector(args.a, "a") if args.a else [Fraction(0)] * n
    b = _vector(args.b, "b") if args.b else [Fraction(0)] * n
    if len(A) != n or any(len(r) != n for r in A) or len(a) != n or len(b) != n:
        raise CliError(f"A must be {n}x{n} and a, b must have {n} entries", PRECONDITION)
    try:
        r = systems.apply_flat_symmetry(_frac(args.l, "l"), _frac(args.k, "k"), A, a, b,
                                        _frac(args.cprime, "c'"), sys_)
    except systems.ConstraintError as exc:
        raise CliError(str(exc), PRECONDITION) from None
    ts = r.theta_scalar.constant_value() if r.theta_scalar is not None else None
    ws = r.omega_scalar.constant_value() if r.omega_scalar is not None else None
    print(f"theta scalar = {ts if ts is not None else 'not a constant multiple'}", file=out)
    print(f"omega scalar = {ws if ws is not None else 'not a constant multiple'}", file=out)
    print(f"predicted = {r.predicted[0]}, {r.predicted[1]}", file=out)
    if args.output:
        _write_or_print(fileio.format_system(r.system), args.output, out)
    return OK if (ts, ws) == r.predicted else NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mapair", description="Exact tools for Monge-Ampere systems with Lagrangian pairs.")
    p.add_argument("--explain", action="store_true", help="describe what the command checks, then run it")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("decompose", help="bi-decompose an n-form")
    s.add_argument("form")
    s.add_argument("--pair-hint", action="append", help="file with V1/V2 basis lines (repeatable)")
    s.add_argument("--trials", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--branch", choices=["positive", "negative"], default="positive")

    s = sub.add_parser("check", help="effectiveness and decomposability of a form")
    s.add_argument("form")

    s = sub.add_parser("prolong", help="Tanaka prolongation dimensions")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--variant", required=True, choices=["ma", "lc", "BiDecomposableMA", "LagrangianContact"])
    s.add_argument("--max-level", type=int, default=12)
    s.add_argument("--machine", action="store_true", help="emit k=<level> dim=<dim> lines")

    s = sub.add_parser("construct", help="build a Monge-Ampere system file")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--model", choices=["flat", "euclidean", "spherical", "hyperbolic", "euclidean-chart"])
    s.add_argument("--c", default="1")
    s.add_argument("--f", default="1", help="Omega1 = f dz^dx, f in x1..xn, z")
    s.add_argument("--g", default="1", help="Omega2 = -g dzt^dp, g in zt, p1..pn")
    s.add_argument("--rho", help="also check theta-independence for theta' = rho theta")
    s.add_argument("-o", "--output")

    s = sub.add_parser("classify", help="Hesse / Euler-Lagrange / flat classification")
    s.add_argument("system")

    s = sub.add_parser("dual", help="Legendre dual of a system")
    s.add_argument("system")
    s.add_argument("-o", "--output")

    s = sub.add_parser("verify", help="check a map against a system")
    s.add_argument("system")
    s.add_argument("lift")

    s = sub.add_parser("symmetry", help="apply a flat-model symmetry")
    s.add_argument("system")
    s.add_argument("--l", default="1")
    s.add_argument("--k", default="1")
    s.add_argument("--A", help="rows separated by ';'")
    s.add_argument("--a")
    s.add_argument("--b")
    s.add_argument("--cprime", default="0")
    s.add_argument("-o", "--output")
    return p


COMMANDS = {
    "decompose": cmd_decompose,
    "check": cmd_check,
    "prolong": cmd_prolong,
    "construct": cmd_construct,
    "classify": cmd_classify,
    "dual": cmd_dual,
    "verify": cmd_verify,
    "symmetry": cmd_symmetry,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.explain:
        print(EXPLAIN[args.command], file=out)
    try:
        return COMMANDS[args.command](args, out)
    except CliError as exc:
        print(f"error: {exc}", file=out)
        return exc.code
    except (ParseError, FormParseError) as exc:
        print(f"parse error: {exc}", file=out)
        return PARSE
    except (systems.NotContactError, PoleError, bd.PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=out)
        return PRECONDITION


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
