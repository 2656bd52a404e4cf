"""Text files for charts, systems and maps.

System file::

    chart x1 x2 x3 z p1 p2 p3
    name: Flat(2, 3)
    oneform theta: dz - p1 dx1 - p2 dx2 - p3 dx3
    form omega: (2) dx1^dx2^dx3 + (-1) dp1^dp2^dp3
    frame E1: d/dx1 + (p1) d/dz; d/dx2 + (p2) d/dz; d/dx3 + (p3) d/dz
    frame E2: d/dp1; d/dp2; d/dp3
    constraint: y1^2 + y2^2 - 1

Map file (source chart first; ``graph`` builds a Legendrian graph lift)::

    chart u1 u2
    map L: x1 <- 2*u1 : (u1^2 + u2^2 + 1); ...
    graph: 1/2*x1^2 + 1/2*x2^2

Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..scalar import ParseError, parse_rational_function
from .forms import Chart, DiffForm, PointMap, VecField
from .systems import MASystem, legendrian_lift

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"


def _strip_outer(text: str) -> str:
    t = text.strip()
    while t.startswith("(") and t.endswith(")"):
        depth = 0
        for i, ch in enumerate(t):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0 and i < len(t) - 1:
                return t
        t = t[1:-1].strip()
    return t


def _coefficient(text: str, chart: Chart, line: int):
    t = text.strip()
    if t.endswith("*"):
        t = t[:-1].strip()
    sign = 1
    if t.startswith("+"):
        t = t[1:].strip()
    if t == "-":
        return chart.rf(-1)
    if not t:
        return chart.rf(1)
    if t.startswith("-") and _strip_outer(t[1:]) != t[1:].strip():
        # "-(...)": the parenthesized part may hold a ':' quotient
        sign, t = -1, t[1:].strip()
    try:
        val = parse_rational_function(_strip_outer(t), chart.coordinates)
    except ParseError as exc:
        raise ParseError(str(exc), line) from None
    return val if sign > 0 else -val


def _generator_regex(chart: Chart, prefix: str, joiner: str | None):
    names = "|".join(re.escape(c) for c in sorted(chart.coordinates, key=len, reverse=True))
    one = rf"{prefix}(?:{names})(?![A-Za-z0-9_])"
    if joiner is None:
        pat = one
    else:
        pat = rf"{one}(?:\s*{re.escape(joiner)}\s*{one})*"
    return re.compile(rf"(?<![A-Za-z0-9_/]){pat}")


def parse_diffform(text: str, chart: Chart, line: int | None = None) -> DiffForm:
    """Parse ``coef dA^dB + coef dC^dD ...`` on the chart."""
    rx = _generator_regex(chart, "d", "^")
    terms: list = []
    pos = 0
    degree = None
    for m in rx.finditer(text):
        coef = _coefficient(text[pos:m.start()], chart, line)
        names = [g.strip()[1:] for g in m.group(0).split("^")]
        if degree is None:
            degree = len(names)
        elif degree != len(names):
            raise ParseError("terms of different degree in one form", line)
        terms.append((tuple(chart.index(n) for n in names), coef))
        pos = m.end()
    tail = text[pos:].strip()
    if tail:
        if not terms and tail == "0":
            raise ParseError("write the zero form with an explicit degree: 0 dNAME...", line)
        raise ParseError(f"unexpected text {tail!r} after last term", line)
    if degree is None:
        raise ParseError("no differential terms found", line)
    out = DiffForm.zero(chart, degree)
    for key, coef in terms:
        out = out + DiffForm(chart, degree, {key: coef})
    return out


def parse_vecfield(text: str, chart: Chart, line: int | None = None) -> VecField:
    rx = _generator_regex(chart, "d/d", None)
    comps: dict = {}
    pos = 0
    for m in rx.finditer(text):
        coef = _coefficient(text[pos:m.start()], chart, line)
        name = m.group(0)[3:]
        comps[name] = comps[name] + coef if name in comps else coef
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"unexpected text {text[pos:].strip()!r} in vector field", line)
    if not comps:
        raise ParseError("no d/dNAME terms found", line)
    return VecField(chart, comps)


def format_diffform(w: DiffForm) -> str:
    if not w.terms:
        first = "^".join("d" + w.chart.coordinates[i] for i in range(w.degree))
        return f"(0) {first}"
    cs = w.chart.coordinates
    return " + ".join(f"({w.terms[k]}) " + "^".join("d" + cs[i] for i in k) for k in sorted(w.terms))


def format_vecfield(v: VecField) -> str:
    cs = v.chart.coordinates
    parts = [f"({v.components[n]}) d/d{n}" for n in cs if n in v.components]
    return " + ".join(parts) if parts else f"(0) d/d{cs[0]}"


def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if s:
            yield no, s


def _split_head(s: str, no: int):
    if ":" not in s:
        raise ParseError(f"expected 'keyword name: ...' in {s!r}", no)
    head, body = s.split(":", 1)
    return head.split(), body.strip()


def _parse_chart(s: str, no: int) -> Chart:
    names = s.split()[1:]
    for n in names:
        if not re.fullmatch(_IDENT, n):
            raise ParseError(f"bad coordinate name {n!r}", no)
    try:
        return Chart(tuple(names))
    except ValueError as exc:
        raise ParseError(str(exc), no) from None


def parse_system(text: str) -> MASystem:
    chart = None
    theta = omega = None
    frames: dict = {}
    constraints = []
    name = ""
    for no, s in _content_lines(text):
        word = s.split()[0].rstrip(":")
        if word == "chart":
            if chart is not None:
                raise ParseError("second chart line", no)
            chart = _parse_chart(s, no)
            continue
        if chart is None:
            raise ParseError("the chart line must come first", no)
        if word == "name":
            name = s.split(":", 1)[1].strip() if ":" in s else ""
        elif word == "oneform":
            _, body = _split_head(s, no)
            theta = parse_diffform(body, chart, no)
            if theta.degree != 1:
                raise ParseError("oneform must have degree 1", no)
        elif word == "form":
            _, body = _split_head(s, no)
            omega = parse_diffform(body, chart, no)
        elif word == "frame":
            head, body = _split_head(s, no)
            if len(head) != 2:
                raise ParseError("expected 'frame E1: ...'", no)
            frames[head[1]] = [parse_vecfield(part, chart, no) for part in body.split(";") if part.strip()]
        elif word == "constraint":
            _, body = _split_head(s, no)
            constraints.append(_coefficient(body, chart, no))
        else:
            raise ParseError(f"unknown keyword {word!r}", no)
    if chart is None:
        raise ParseError("missing chart line", None)
    if theta is None or omega is None:
        raise ParseError("a system needs a oneform line and a form line", None)
    pair = None
    if frames:
        if len(frames) != 2:
            raise ParseError("give exactly two frame lines", None)
        a, b = sorted(frames)
        pair = (frames[a], frames[b])
    return MASystem(chart, theta, omega, pair_frames=pair, constraints=tuple(constraints), name=name)


def format_system(sys: MASystem) -> str:
    lines = ["chart " + " ".join(sys.chart.coordinates)]
    if sys.name:
        lines.append(f"name: {sys.name}")
    lines.append(f"oneform theta: {format_diffform(sys.theta)}")
    lines.append(f"form omega: {format_diffform(sys.omega)}")
    if sys.pair_frames is not None:
        for label, frame in zip(("E1", "E2"), sys.pair_frames):
            lines.append(f"frame {label}: " + "; ".join(format_vecfield(v) for v in frame))
    for c in sys.constraints:
        lines.append(f"constraint: {c}")
    return "\n".join(lines) + "\n"


@dataclass
class MapSpec:
    """A parsed map file; the target chart is fixed when the map is bound."""

    source: Chart
    name: str = "L"
    components: dict = field(default_factory=dict)
    graph: object = None

    def bind(self, target: Chart) -> PointMap:
        if self.graph is not None:
            n = self.source.dim
            L = legendrian_lift(self.graph, n)
            if L.target != target:
                raise ValueError(f"graph lift lands in {L.target.coordinates}, system chart is {target.coordinates}")
            return L
        missing = [c for c in target.coordinates if c not in self.components]
        if missing:
            raise ValueError(f"map does not assign {missing}")
        extra = [c for c in self.components if c not in target.coordinates]
        if extra:
            raise ValueError(f"map assigns coordinates {extra} that the system chart lacks")
        return PointMap(self.source, target, self.components)


def parse_map(text: str) -> MapSpec:
    spec = None
    for no, s in _content_lines(text):
        word = s.split()[0].rstrip(":")
        if word == "chart":
            if spec is not None:
                raise ParseError("second chart line", no)
            spec = MapSpec(_parse_chart(s, no))
            continue
        if spec is None:
            raise ParseError("the chart line must come first", no)
        if word == "map":
            head, body = _split_head(s, no)
            if len(head) == 2:
                spec.name = head[1]
            for part in body.split(";"):
                if not part.strip():
                    continue
                if "<-" not in part:
                    raise ParseError(f"expected 'name <- expr' in {part.strip()!r}", no)
                tgt, expr = part.split("<-", 1)
                tgt = tgt.strip()
                if not re.fullmatch(_IDENT, tgt):
                    raise ParseError(f"bad target name {tgt!r}", no)
                spec.components[tgt] = _coefficient(expr, spec.source, no)
        elif word == "graph":
            _, body = _split_head(s, no)
            f = _coefficient(body, spec.source, no)
            if not f.is_polynomial():
                raise ParseError("graph function must be a polynomial", no)
            spec.graph = f.as_polynomial()
        else:
            raise ParseError(f"unknown keyword {word!r}", no)
    if spec is None:
        raise ParseError("missing chart line", None)
    if spec.graph is None and not spec.components:
        raise ParseError("a map file needs a map line or a graph line", None)
    return spec


def format_map(L: PointMap, name: str = "L") -> str:
    body = "; ".join(f"{n} <- {L.components[n]}" for n in L.target.coordinates)
    return f"chart {' '.join(L.source.coordinates)}\nmap {name}: {body}\n"
