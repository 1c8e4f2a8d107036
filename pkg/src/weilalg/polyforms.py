"""Differential forms and vector fields with polynomial coefficients.

Forms are stored as ``{I: coeff}`` where ``I`` is a strictly increasing tuple
of coordinate indices (parameters of the chart never appear in ``I``).  A form
may mix degrees; all operators act degree-wise.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactpoly import (
    Chart,
    ChartError,
    Poly,
    PolyMap,
    PolySyntaxError,
    Scalar,
    UndeclaredVariable,
    poly_parse,
)


def merge_sign(a: tuple[int, ...], b: tuple[int, ...]):
    """Sign and sorted union of dx_a ∧ dx_b, or (0, None) when they overlap."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    sa = set(a)
    if any(j in sa for j in b):
        return 0, None
    inv = 0
    for j in b:
        inv += sum(1 for i in a if i > j)
    return (-1 if inv & 1 else 1), tuple(sorted(a + b))


class PolyForm:
    __slots__ = ("chart", "comps")

    def __init__(self, chart: Chart, comps: Mapping[tuple[int, ...], Poly] | None = None, *, _trusted=False):
        self.chart = chart
        if _trusted:
            self.comps = comps
            return
        clean = {}
        for k, v in (comps or {}).items():
            k = tuple(k)
            if any(k[i] >= k[i + 1] for i in range(len(k) - 1)):
                raise ValueError(f"form key {k} not strictly increasing")
            if k and (k[0] < 0 or k[-1] >= chart.dim):
                raise ValueError(f"form key {k} out of range for {chart}")
            if v.chart != chart:
                raise ChartError(f"coefficient on {v.chart}, form on {chart}")
            if v:
                clean[k] = v
        self.comps = clean

    # constructors
    @classmethod
    def zero(cls, chart: Chart) -> "PolyForm":
        return cls(chart, {}, _trusted=True)

    @classmethod
    def function(cls, f: Poly) -> "PolyForm":
        return cls(f.chart, {(): f} if f else {}, _trusted=True)

    @classmethod
    def const(cls, chart: Chart, c: Scalar) -> "PolyForm":
        return cls.function(Poly.const(chart, c))

    @classmethod
    def dx(cls, chart: Chart, name: str) -> "PolyForm":
        if name not in chart.coords:
            raise UndeclaredVariable(name)
        return cls(chart, {(chart.coords.index(name),): Poly.const(chart, 1)}, _trusted=True)

    @classmethod
    def basis(cls, chart: Chart, key: tuple[int, ...], coeff: Poly | None = None) -> "PolyForm":
        return cls(chart, {tuple(key): coeff if coeff is not None else Poly.const(chart, 1)})

    @classmethod
    def parse(cls, text: str, chart: Chart) -> "PolyForm":
        return form_parse(text, chart)

    # queries
    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self):
        return bool(self.comps)

    def degrees(self) -> set[int]:
        return {len(k) for k in self.comps}

    def degree(self) -> int:
        """Degree of a homogeneous nonzero form (-1 for zero)."""
        ds = self.degrees()
        if not ds:
            return -1
        if len(ds) > 1:
            raise ValueError(f"form is not homogeneous: degrees {sorted(ds)}")
        return next(iter(ds))

    def part(self, k: int) -> "PolyForm":
        return PolyForm(self.chart, {I: c for I, c in self.comps.items() if len(I) == k}, _trusted=True)

    def function_part(self) -> Poly:
        return self.comps.get((), Poly.zero(self.chart))

    def coeff(self, key: Sequence[int]) -> Poly:
        return self.comps.get(tuple(key), Poly.zero(self.chart))

    # arithmetic
    def _check(self, other: "PolyForm"):
        if not isinstance(other, PolyForm):
            raise TypeError(f"expected PolyForm, got {type(other).__name__}")
        if other.chart != self.chart:
            raise ChartError(f"chart mismatch: {self.chart} vs {other.chart}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Poly)):
            other = PolyForm.function(other if isinstance(other, Poly) else Poly.const(self.chart, other))
        self._check(other)
        if not other.comps:
            return self
        if not self.comps:
            return other
        out = dict(self.comps)
        for k, v in other.comps.items():
            s = out.get(k)
            if s is None:
                out[k] = v
            else:
                s = s + v
                if s:
                    out[k] = s
                else:
                    del out[k]
        return PolyForm(self.chart, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return PolyForm(self.chart, {k: -v for k, v in self.comps.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PolyForm":
        """Multiply by a scalar or a function (a 0-form coefficient)."""
        if isinstance(c, Poly):
            if c.chart != self.chart:
                raise ChartError("function on another chart")
            if not c:
                return PolyForm.zero(self.chart)
            out = {}
            for k, v in self.comps.items():
                w = v * c
                if w:
                    out[k] = w
            return PolyForm(self.chart, out, _trusted=True)
        c = Fraction(c)
        if not c:
            return PolyForm.zero(self.chart)
        if c == 1:
            return self
        return PolyForm(self.chart, {k: v.scale(c) for k, v in self.comps.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, PolyForm):
            return form_wedge(self, other)
        return self.scale(other)

    __rmul__ = scale

    def __xor__(self, other):
        return form_wedge(self, other)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self == PolyForm.const(self.chart, other)
        if isinstance(other, Poly):
            return self == PolyForm.function(other)
        if not isinstance(other, PolyForm):
            return NotImplemented
        return self.chart == other.chart and self.comps == other.comps

    def __hash__(self):
        return hash((self.chart, frozenset(self.comps.items())))

    def embed(self, target: Chart) -> "PolyForm":
        """Move to a chart with the same coordinates and more parameters."""
        if target == self.chart:
            return self
        if target.coords != self.chart.coords:
            raise ChartError(f"cannot embed forms from {self.chart} into {target}")
        return PolyForm(target, {k: v.embed(target) for k, v in self.comps.items()}, _trusted=True)

    def map_coeffs(self, fn) -> "PolyForm":
        out = {}
        chart = None
        for k, v in self.comps.items():
            w = fn(v)
            chart = w.chart
            if w:
                out[k] = w
        if chart is None:
            return self
        return PolyForm(chart, out, _trusted=True)

    def sorted_items(self):
        return sorted(self.comps.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def __str__(self):
        if not self.comps:
            return "0"
        parts = []
        names = self.chart.coords
        for k, v in self.sorted_items():
            diff = "^".join("d" + names[i] for i in k)
            if not diff:
                parts.append(f"({v})")
            else:
                parts.append(f"({v}) {diff}")
        return " + ".join(parts)

    def __repr__(self):
        return f"PolyForm({str(self)!r})"


class PolyVectorField:
    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: Sequence[Poly]):
        if len(components) != chart.dim:
            raise ChartError(f"{len(components)} components for {chart.dim}-dimensional chart")
        for c in components:
            if c.chart != chart:
                raise ChartError(f"component on {c.chart}, expected {chart}")
        self.chart = chart
        self.components = tuple(components)

    @classmethod
    def zero(cls, chart: Chart) -> "PolyVectorField":
        return cls(chart, [Poly.zero(chart)] * chart.dim)

    @classmethod
    def coordinate(cls, chart: Chart, name: str) -> "PolyVectorField":
        i = chart.coords.index(name)
        return cls(chart, [Poly.const(chart, 1 if j == i else 0) for j in range(chart.dim)])

    @classmethod
    def from_strings(cls, chart: Chart, comps: Sequence[str]) -> "PolyVectorField":
        return cls(chart, [poly_parse(s, chart) for s in comps])

    def __call__(self, f: Poly) -> Poly:
        """Directional derivative X(f)."""
        if f.chart != self.chart:
            raise ChartError("function on another chart")
        out = Poly.zero(self.chart)
        for i, c in enumerate(self.components):
            if c:
                out = out + c * f.partial_index(i)
        return out

    def __add__(self, other: "PolyVectorField"):
        if other.chart != self.chart:
            raise ChartError("chart mismatch")
        return PolyVectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return PolyVectorField(self.chart, [-a for a in self.components])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PolyVectorField":
        if isinstance(c, Poly):
            return PolyVectorField(self.chart, [a * c for a in self.components])
        return PolyVectorField(self.chart, [a.scale(c) for a in self.components])

    def bracket(self, other: "PolyVectorField") -> "PolyVectorField":
        if other.chart != self.chart:
            raise ChartError("chart mismatch")
        return PolyVectorField(self.chart, [self(b) - other(a) for a, b in zip(self.components, other.components)])

    def embed(self, target: Chart) -> "PolyVectorField":
        if target == self.chart:
            return self
        if target.coords != self.chart.coords:
            raise ChartError("cannot embed vector field")
        return PolyVectorField(target, [c.embed(target) for c in self.components])

    def is_zero(self) -> bool:
        return not any(self.components)

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.chart == other.chart and self.components == other.components

    def __hash__(self):
        return hash((self.chart, self.components))

    def __str__(self):
        terms = [f"({c}) d/d{n}" for n, c in zip(self.chart.coords, self.components) if c]
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"PolyVectorField({str(self)!r})"


def _align(a, b):
    """Bring two chart-carrying objects onto a common parameter-extended chart."""
    if a.chart == b.chart:
        return a, b
    if a.chart.coords != b.chart.coords:
        raise ChartError(f"chart mismatch: {a.chart} vs {b.chart}")
    from .exactpoly import common_chart

    c = common_chart(a.chart, b.chart)
    return a.embed(c), b.embed(c)


def form_wedge(a: PolyForm, b: PolyForm) -> PolyForm:
    a, b = _align(a, b)
    out: dict = {}
    for ka, va in a.comps.items():
        for kb, vb in b.comps.items():
            s, k = merge_sign(ka, kb)
            if not s:
                continue
            v = va * vb
            if s < 0:
                v = -v
            prev = out.get(k)
            out[k] = v if prev is None else prev + v
    return PolyForm(a.chart, {k: v for k, v in out.items() if v}, _trusted=True)


def wedge_all(forms: Iterable[PolyForm], chart: Chart) -> PolyForm:
    out = PolyForm.const(chart, 1)
    for f in forms:
        out = form_wedge(out, f)
    return out


def form_d(a: PolyForm) -> PolyForm:
    out: dict = {}
    n = a.chart.dim
    for k, v in a.comps.items():
        for j in range(n):
            dv = v.partial_index(j)
            if not dv:
                continue
            s, key = merge_sign((j,), k)
            if not s:
                continue
            if s < 0:
                dv = -dv
            prev = out.get(key)
            out[key] = dv if prev is None else prev + dv
    return PolyForm(a.chart, {k: v for k, v in out.items() if v}, _trusted=True)


def d_function(f: Poly) -> PolyForm:
    return form_d(PolyForm.function(f))


def form_interior(X: PolyVectorField, a: PolyForm) -> PolyForm:
    X, a = _align(X, a)
    out: dict = {}
    for k, v in a.comps.items():
        for pos, j in enumerate(k):
            c = X.components[j]
            if not c:
                continue
            w = v * c
            if pos & 1:
                w = -w
            key = k[:pos] + k[pos + 1:]
            prev = out.get(key)
            out[key] = w if prev is None else prev + w
    return PolyForm(a.chart, {k: v for k, v in out.items() if v}, _trusted=True)


def form_lie(X: PolyVectorField, a: PolyForm) -> PolyForm:
    return form_d(form_interior(X, a)) + form_interior(X, form_d(a))


def interior_bivector(X: PolyVectorField, Y: PolyVectorField, a: PolyForm) -> PolyForm:
    """i_{X∧Y} a := i_Y i_X a."""
    return form_interior(Y, form_interior(X, a))


def _differentials(m: PolyMap) -> list[PolyForm]:
    key = "differentials"
    hit = m._cache.get(key)
    if hit is None:
        hit = [d_function(c) for c in m.components[: m.target.dim]]
        m._cache[key] = hit
    return hit


def form_pullback(m: PolyMap, a: PolyForm) -> PolyForm:
    if a.chart != m.target:
        extra = [p for p in a.chart.params if p not in m.target.params]
        if a.chart.coords == m.target.coords and extra:
            m = m.with_params(extra)
            if a.chart != m.target:
                a = a.embed(m.target)
        else:
            raise ChartError(f"cannot pull back a form on {a.chart} along a map into {m.target}")
    src = m.source
    dphi = _differentials(m)
    cache: dict = {(): PolyForm.const(src, 1)}

    def basis_image(k):
        hit = cache.get(k)
        if hit is None:
            hit = form_wedge(basis_image(k[:-1]), dphi[k[-1]])
            cache[k] = hit
        return hit

    out = PolyForm.zero(src)
    for k, v in a.comps.items():
        if len(k) > src.dim:
            continue
        img = basis_image(k)
        if not img:
            continue
        out = out + img.scale(v.substitute(m.components, src))
    return out


# --- literal syntax -----------------------------------------------------------

_DIFF = re.compile(r"d([A-Za-z_][A-Za-z0-9_]*)")


def _split_top_level(text: str):
    """Split on top-level '+'/'-' (outside parentheses) keeping signs."""
    parts = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            prev = text[start:i].rstrip()
            # a sign directly after an operator belongs to the operand
            if prev and prev[-1] not in "*/^(":
                parts.append((start, text[start:i]))
                start = i
    parts.append((start, text[start:]))
    return parts


def form_parse(text: str, chart: Chart) -> PolyForm:
    """Parse ``"x*y dx^dy + 1 dz - 2"`` style literals.

    Each top-level summand is ``<poly>`` optionally followed by whitespace and a
    wedge of differentials ``d<var>^d<var>...``.
    """
    if not text.strip():
        raise PolySyntaxError("empty form", text, 0)
    out = PolyForm.zero(chart)
    for start, chunk in _split_top_level(text):
        s = chunk.strip()
        if not s:
            raise PolySyntaxError("empty summand", text, start)
        m = re.search(r"(?:^|\s)(d[A-Za-z_][A-Za-z0-9_]*(?:\s*\^\s*d[A-Za-z_][A-Za-z0-9_]*)*)\s*$", s)
        diffs: list[str] = []
        coeff_txt = s
        if m is not None and not (m.start(1) == 0 and m.group(1) in chart.variables):
            names = [x.strip()[1:] for x in m.group(1).split("^")]
            bad = [n for n in names if n not in chart.coords]
            if bad:
                raise UndeclaredVariable(f"differential of undeclared coordinate {bad[0]!r} in {text!r}")
            diffs = names
            coeff_txt = s[: m.start(1)].strip()
        sign = 1
        if coeff_txt in ("+", "-", ""):
            sign = -1 if coeff_txt == "-" else 1
            coeff = Poly.const(chart, sign)
        else:
            coeff = poly_parse(coeff_txt, chart)
        term = PolyForm.function(coeff)
        for n in diffs:
            term = form_wedge(term, PolyForm.dx(chart, n))
        out = out + term
    return out
