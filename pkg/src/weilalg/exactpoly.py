"""Exact multivariate polynomials with rational coefficients over named charts.

A :class:`Chart` is an ordered list of coordinate names, optionally followed by
formal parameters (names introduced by :func:`chart_extend`).  Parameters take
part in polynomial arithmetic like any other variable, but exterior calculus
(see :mod:`weilalg.polyforms`) only differentiates along coordinates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

Rat = Fraction
Scalar = Union[int, Fraction]


class ChartError(ValueError):
    """Operands live on incompatible charts."""


class PolySyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos} in {text!r}")
        self.pos = pos
        self.text = text


class UndeclaredVariable(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    coords: tuple[str, ...]
    params: tuple[str, ...] = ()

    def __post_init__(self):
        names = self.coords + self.params
        if len(set(names)) != len(names):
            raise ChartError(f"duplicate variable names in chart {names}")
        for n in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n):
                raise ChartError(f"bad variable name {n!r}")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.coords + self.params

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def nvars(self) -> int:
        return len(self.coords) + len(self.params)

    @cached_property
    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.variables)}

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def __repr__(self):
        if self.params:
            return f"Chart({list(self.coords)} | {list(self.params)})"
        return f"Chart({list(self.coords)})"


def chart(*coords: str) -> Chart:
    return Chart(tuple(coords))


def chart_extend(c: Chart, fresh: Sequence[str]) -> Chart:
    """Append formal parameters to a chart."""
    for n in fresh:
        if n in c:
            raise ChartError(f"name collision: {n!r} already in {c}")
    if len(set(fresh)) != len(fresh):
        raise ChartError(f"repeated fresh names {list(fresh)}")
    return Chart(c.coords, c.params + tuple(fresh))


def common_chart(*charts: Chart) -> Chart:
    """Smallest chart containing all the given ones (same coordinates, merged parameters)."""
    base = charts[0]
    params = list(base.params)
    for c in charts[1:]:
        if c.coords != base.coords:
            raise ChartError(f"coordinate mismatch: {base} vs {c}")
        for p in c.params:
            if p not in params:
                params.append(p)
    if len(params) == len(base.params):
        return base
    return Chart(base.coords, tuple(params))


def _fmt_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Poly:
    """Immutable polynomial: a map from exponent vectors to nonzero rationals."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[tuple[int, ...], Scalar] | None = None, *, _trusted=False):
        self.chart = chart
        if _trusted:
            self.terms = terms
        else:
            n = chart.nvars
            clean = {}
            for e, c in (terms or {}).items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} has wrong length for {chart}")
                if c:
                    clean[tuple(e)] = Fraction(c)
            self.terms = clean
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, chart: Chart) -> "Poly":
        return cls(chart, {}, _trusted=True)

    @classmethod
    def const(cls, chart: Chart, c: Scalar) -> "Poly":
        c = Fraction(c)
        if not c:
            return cls.zero(chart)
        return cls(chart, {(0,) * chart.nvars: c}, _trusted=True)

    @classmethod
    def var(cls, chart: Chart, name: str) -> "Poly":
        if name not in chart:
            raise UndeclaredVariable(name)
        e = [0] * chart.nvars
        e[chart.index[name]] = 1
        return cls(chart, {tuple(e): Fraction(1)}, _trusted=True)

    @classmethod
    def parse(cls, text: str, chart: Chart) -> "Poly":
        return poly_parse(text, chart)

    # predicates
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.chart.nvars, Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, names: Iterable[str]) -> int:
        idx = [self.chart.index[n] for n in names]
        return max((sum(e[i] for i in idx) for e in self.terms), default=-1)

    # arithmetic
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.chart != self.chart:
                raise ChartError(f"chart mismatch: {self.chart} vs {other.chart}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.chart, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s += c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly(self.chart, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.chart, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Scalar) -> "Poly":
        c = Fraction(c)
        if not c:
            return Poly.zero(self.chart)
        if c == 1:
            return self
        return Poly(self.chart, {e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return Poly.zero(self.chart)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return Poly(self.chart, {e: c for e, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = Poly.const(self.chart, 1)
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
            return self == Poly.const(self.chart, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self.terms.items())))
        return self._hash

    # calculus
    def partial(self, name: str) -> "Poly":
        if name not in self.chart:
            raise UndeclaredVariable(name)
        i = self.chart.index[name]
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                e2 = e[:i] + (k - 1,) + e[i + 1:]
                out[e2] = c * k
        return Poly(self.chart, out, _trusted=True)

    def partial_index(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Poly(self.chart, out, _trusted=True)

    def substitute(self, images: Sequence["Poly"], target: Chart | None = None) -> "Poly":
        """Compose with the map whose k-th component is ``images[k]``."""
        if len(images) != self.chart.nvars:
            raise ChartError("one image per variable required")
        if target is None:
            if not images:
                raise ChartError("target chart needed for a substitution on an empty chart")
            target = images[0].chart
        for im in images:
            if im.chart != target:
                raise ChartError(f"image on {im.chart}, expected {target}")
        powers: dict = {}

        def pw(i, k):
            key = (i, k)
            p = powers.get(key)
            if p is None:
                p = images[i] if k == 1 else pw(i, k - 1) * images[i]
                powers[key] = p
            return p

        result = Poly.zero(target)
        for e, c in self.terms.items():
            term = Poly.const(target, c)
            for i, k in enumerate(e):
                if k:
                    term = term * pw(i, k)
            result = result + term
        return result

    def evaluate(self, values: Mapping[str, Scalar]) -> "Poly":
        """Substitute numbers for some variables, keeping the chart."""
        imgs = []
        for n in self.chart.variables:
            if n in values:
                imgs.append(Poly.const(self.chart, values[n]))
            else:
                imgs.append(Poly.var(self.chart, n))
        return self.substitute(imgs, self.chart)

    def embed(self, target: Chart) -> "Poly":
        """Canonical inclusion into a chart containing every variable of this one."""
        if target == self.chart:
            return self
        try:
            pos = [target.index[n] for n in self.chart.variables]
        except KeyError as exc:
            raise ChartError(f"cannot embed {self.chart} into {target}: missing {exc}") from None
        n = target.nvars
        out = {}
        for e, c in self.terms.items():
            e2 = [0] * n
            for i, k in zip(pos, e):
                e2[i] = k
            out[tuple(e2)] = c
        return Poly(target, out, _trusted=True)

    def restrict(self, target: Chart) -> "Poly":
        """Inverse of :meth:`embed`; fails if a dropped variable occurs."""
        if target == self.chart:
            return self
        keep = [self.chart.index[n] for n in target.variables]
        drop = [i for i in range(self.chart.nvars) if i not in keep]
        out = {}
        for e, c in self.terms.items():
            if any(e[i] for i in drop):
                raise ChartError(f"polynomial depends on variables outside {target}")
            out[tuple(e[i] for i in keep)] = c
        return Poly(target, out, _trusted=True)

    def coefficients_in(self, names: Sequence[str]) -> dict[tuple[int, ...], "Poly"]:
        """Split by monomials in ``names``: {exponents: coefficient poly (same chart)}."""
        idx = [self.chart.index[n] for n in names]
        out: dict = {}
        for e, c in self.terms.items():
            key = tuple(e[i] for i in idx)
            e2 = list(e)
            for i in idx:
                e2[i] = 0
            out.setdefault(key, {})[tuple(e2)] = c
        return {k: Poly(self.chart, v, _trusted=True) for k, v in out.items()}

    # printing
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda ec: (-sum(ec[0]), tuple(-k for k in ec[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.chart.variables
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            a = abs(c)
            if mono:
                body = mono if a == 1 else f"{_fmt_rat(a)}*{mono}"
            else:
                body = _fmt_rat(a)
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"Poly({str(self)!r})"

    def n_terms(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class PolyMap:
    """Polynomial map ``source -> target``: one component per target coordinate."""

    source: Chart
    target: Chart
    components: tuple[Poly, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if len(self.components) != self.target.nvars:
            raise ChartError(
                f"{len(self.components)} components for target with {self.target.nvars} variables")
        for c in self.components:
            if c.chart != self.source:
                raise ChartError(f"component on {c.chart}, expected {self.source}")

    @classmethod
    def from_strings(cls, source: Chart, target: Chart, comps: Sequence[str]) -> "PolyMap":
        return cls(source, target, tuple(poly_parse(s, source) for s in comps))

    @classmethod
    def identity(cls, c: Chart) -> "PolyMap":
        return cls(c, c, tuple(Poly.var(c, n) for n in c.variables))

    def __call__(self, p: Poly) -> Poly:
        return poly_substitute(p, self)

    def compose(self, first: "PolyMap") -> "PolyMap":
        """``self ∘ first``."""
        if first.target != self.source:
            raise ChartError("maps not composable")
        return PolyMap(first.source, self.target,
                       tuple(c.substitute(first.components, first.source) for c in self.components))

    def with_params(self, params: Sequence[str]) -> "PolyMap":
        """Extend by the identity on formal parameters shared by source and target."""
        params = tuple(p for p in params if p not in self.target.params)
        if not params:
            return self
        key = ("params", params)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        src = chart_extend(self.source, params)
        tgt = chart_extend(self.target, params)
        comps = [c.embed(src) for c in self.components]
        comps += [Poly.var(src, p) for p in params]
        out = PolyMap(src, tgt, tuple(comps))
        self._cache[key] = out
        return out

    def __str__(self):
        body = ", ".join(f"{n} = {c}" for n, c in zip(self.target.variables, self.components))
        return f"({body})"


def poly_substitute(a: Poly, m: PolyMap) -> Poly:
    if a.chart != m.target:
        extra = [p for p in a.chart.params if p not in m.target.params]
        if a.chart.coords == m.target.coords and extra:
            m = m.with_params(extra)
            if a.chart != m.target:
                a = a.embed(m.target)
        else:
            raise ChartError(f"cannot pull {a.chart} back along a map into {m.target}")
    return a.substitute(m.components, m.source)


def poly_partial(a: Poly, var: str) -> Poly:
    return a.partial(var)


def poly_arith(op: str, a: Poly, b: Poly):
    if a.chart != b.chart:
        raise ChartError(f"chart mismatch: {a.chart} vs {b.chart}")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "eq":
        return a == b
    raise ValueError(f"unknown op {op!r}")


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def tokenize(text: str):
    """Yield (kind, value, pos) with kind in {'int', 'name', 'op'}; ends with ('end', None, len)."""
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            toks.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2) is not None:
            toks.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise PolySyntaxError(f"unexpected character {ch!r}", text, m.start(3))
            toks.append(("op", ch, m.start(3)))
        pos = m.end()
    toks.append(("end", None, n))
    return toks


class _PolyParser:
    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.chart = chart
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise PolySyntaxError(msg, self.text, tok[2])

    def expect_op(self, ch):
        t = self.take()
        if t[0] != "op" or t[1] != ch:
            self.error(f"expected {ch!r}", t)

    def expr(self) -> Poly:
        sign = 1
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
        acc = self.term().scale(sign)
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if t[1] == "+" else acc - rhs
            else:
                return acc

    def term(self) -> Poly:
        acc = self.factor()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] == "*":
                self.take()
                acc = acc * self.factor()
            else:
                return acc

    def factor(self) -> Poly:
        b = self.base()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            e = self.take()
            if e[0] != "int":
                self.error("expected natural exponent", e)
            b = b ** e[1]
        return b

    def base(self) -> Poly:
        t = self.take()
        if t[0] == "int":
            val = Fraction(t[1])
            nt = self.peek()
            if nt[0] == "op" and nt[1] == "/":
                self.take()
                d = self.take()
                if d[0] != "int" or d[1] == 0:
                    self.error("expected positive integer denominator", d)
                val = val / d[1]
            return Poly.const(self.chart, val)
        if t[0] == "name":
            if t[1] not in self.chart:
                raise UndeclaredVariable(f"undeclared variable {t[1]!r} at position {t[2]} in {self.text!r}")
            return Poly.var(self.chart, t[1])
        if t[0] == "op" and t[1] == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        self.error("expected number, variable or '('", t)

    def finish(self):
        t = self.peek()
        if t[0] != "end":
            self.error("unexpected token", t)


def poly_parse(text: str, chart: Chart) -> Poly:
    """Parse the polynomial grammar (explicit ``*``, ``^`` natural powers, ``a/b`` rationals)."""
    p = _PolyParser(text, chart)
    if p.peek()[0] == "end":
        p.error("empty expression")
    out = p.expr()
    p.finish()
    return out
