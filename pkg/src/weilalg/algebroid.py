"""Lie algebroids presented on a single chart with a global frame e_1..e_n.

Frame indices are 0-based internally and 1-based in anything printed or read
from files (``th1``, ``"1,2"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .exactpoly import Chart, ChartError, Poly, Scalar, chart, common_chart, poly_parse
from .polyforms import PolyVectorField
from .report import CertReport


class AlgebroidError(ValueError):
    pass


@dataclass(frozen=True)
class Section:
    """alpha = sum_i coeffs[i] e_i; coefficients may live on a parameter-extended chart."""

    coeffs: tuple[Poly, ...]

    def __post_init__(self):
        if self.coeffs:
            c0 = self.coeffs[0].chart
            for c in self.coeffs:
                if c.chart != c0:
                    raise ChartError("section coefficients on different charts")

    @property
    def chart(self) -> Chart:
        return self.coeffs[0].chart

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    @classmethod
    def frame(cls, c: Chart, n: int, i: int, coeff: Poly | Scalar = 1) -> "Section":
        if not isinstance(coeff, Poly):
            coeff = Poly.const(c, coeff)
        return cls(tuple(coeff if j == i else Poly.zero(c) for j in range(n)))

    @classmethod
    def zero(cls, c: Chart, n: int) -> "Section":
        return cls(tuple(Poly.zero(c) for _ in range(n)))

    @classmethod
    def from_strings(cls, c: Chart, comps: Sequence[str]) -> "Section":
        return cls(tuple(poly_parse(s, c) for s in comps))

    def embed(self, target: Chart) -> "Section":
        if target == self.chart:
            return self
        return Section(tuple(c.embed(target) for c in self.coeffs))

    def __add__(self, other: "Section") -> "Section":
        a, b = _align_sections(self, other)
        return Section(tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    def __neg__(self):
        return Section(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "Section":
        if isinstance(f, Poly):
            if f.chart != self.chart:
                c = common_chart(f.chart, self.chart)
                return self.embed(c).scale(f.embed(c))
            return Section(tuple(f * c for c in self.coeffs))
        return Section(tuple(c.scale(f) for c in self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __str__(self):
        parts = [f"({c}) e{i + 1}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(parts) if parts else "0"


def _align_sections(a: Section, b: Section):
    if a.rank != b.rank:
        raise AlgebroidError(f"rank mismatch: {a.rank} vs {b.rank}")
    if a.chart == b.chart:
        return a, b
    c = common_chart(a.chart, b.chart)
    return a.embed(c), b.embed(c)


class AlgebroidPresentation:
    """Anchor rho^a_i (row i = frame section, column a = base coordinate) and c^i_{jk}."""

    def __init__(self, base: Chart, rank: int, anchor: Sequence[Sequence[Poly]],
                 structure: Mapping[tuple[int, int], Sequence[Poly]], name: str = ""):
        self.base = base
        self.rank = rank
        self.name = name
        if len(anchor) != rank or any(len(row) != base.dim for row in anchor):
            raise AlgebroidError(f"anchor must be {rank} x {base.dim}")
        self.anchor = tuple(tuple(r) for r in anchor)
        for row in self.anchor:
            for p in row:
                if p.chart != base:
                    raise ChartError("anchor entry on the wrong chart")
        clean: dict = {}
        for (j, k), vec in structure.items():
            if not (0 <= j < rank and 0 <= k < rank):
                raise AlgebroidError(f"structure index ({j + 1},{k + 1}) out of range")
            if j == k:
                if any(vec):
                    raise AlgebroidError("c^i_{jj} must vanish")
                continue
            if len(vec) != rank:
                raise AlgebroidError("structure vectors must have length rank")
            vec = tuple(vec)
            for p in vec:
                if p.chart != base:
                    raise ChartError("structure function on the wrong chart")
            if j > k:
                j, k, vec = k, j, tuple(-p for p in vec)
            if (j, k) in clean:
                raise AlgebroidError(f"structure pair ({j + 1},{k + 1}) given twice")
            if any(vec):
                clean[(j, k)] = vec
        self.structure = clean
        self._views: dict = {}

    # accessors
    @property
    def dim(self) -> int:
        return self.base.dim

    def c(self, i: int, j: int, k: int, on: Chart | None = None) -> Poly:
        """Structure function c^i_{jk} (antisymmetric in j, k)."""
        on = on or self.base
        if j == k:
            return Poly.zero(on)
        if j < k:
            vec = self.structure.get((j, k))
            return self._emb(vec[i], on) if vec else Poly.zero(on)
        vec = self.structure.get((k, j))
        return -self._emb(vec[i], on) if vec else Poly.zero(on)

    def rho(self, i: int, a: int, on: Chart | None = None) -> Poly:
        return self._emb(self.anchor[i][a], on or self.base)

    def _emb(self, p: Poly, on: Chart) -> Poly:
        if on == self.base:
            return p
        key = (id(p), on)
        hit = self._views.get(key)
        if hit is None:
            hit = (p, p.embed(on))
            self._views[key] = hit
        return hit[1]

    def frame(self, i: int, on: Chart | None = None) -> Section:
        return Section.frame(on or self.base, self.rank, i)

    def frames(self, on: Chart | None = None) -> list[Section]:
        return [self.frame(i, on) for i in range(self.rank)]

    def is_constant(self) -> bool:
        return all(p.is_constant() for row in self.anchor for p in row) and all(
            p.is_constant() for v in self.structure.values() for p in v)

    def perturbed(self, j: int, k: int, i: int, delta: Poly | Scalar) -> "AlgebroidPresentation":
        """Copy with c^i_{jk} shifted by delta (negative controls)."""
        if not isinstance(delta, Poly):
            delta = Poly.const(self.base, delta)
        st = {key: list(v) for key, v in self.structure.items()}
        if j > k:
            j, k, delta = k, j, -delta
        vec = st.setdefault((j, k), [Poly.zero(self.base)] * self.rank)
        vec[i] = vec[i] + delta
        return AlgebroidPresentation(self.base, self.rank, self.anchor, st, name=self.name + "~perturbed")

    def with_anchor_sign(self, sign: int) -> "AlgebroidPresentation":
        anchor = [[p.scale(sign) for p in row] for row in self.anchor]
        return AlgebroidPresentation(self.base, self.rank, anchor, self.structure, name=f"{self.name}~anchor{sign:+d}")

    def __repr__(self):
        return f"AlgebroidPresentation({self.name or '?'}: rank {self.rank} over {self.base})"

    def describe(self) -> dict:
        return {
            "vars": list(self.base.coords),
            "rank": self.rank,
            "anchor": [[str(p) for p in row] for row in self.anchor],
            "structure": {f"{j + 1},{k + 1}": [str(p) for p in v] for (j, k), v in sorted(self.structure.items())},
        }


# --- operations ---------------------------------------------------------------

def anchor_apply(P: AlgebroidPresentation, a: Section) -> PolyVectorField:
    if a.rank != P.rank:
        raise AlgebroidError(f"rank mismatch: section {a.rank}, algebroid {P.rank}")
    on = a.chart
    comps = []
    for col in range(P.dim):
        acc = Poly.zero(on)
        for i, g in enumerate(a.coeffs):
            if g:
                r = P.rho(i, col, on)
                if r:
                    acc = acc + g * r
        comps.append(acc)
    return PolyVectorField(on, comps)


def bracket_sections(P: AlgebroidPresentation, a: Section, b: Section) -> Section:
    a, b = _align_sections(a, b)
    if a.rank != P.rank:
        raise AlgebroidError(f"rank mismatch: section {a.rank}, algebroid {P.rank}")
    on = a.chart
    n = P.rank
    out = [Poly.zero(on) for _ in range(n)]
    for (j, k), vec in P.structure.items():
        w = a.coeffs[j] * b.coeffs[k] - a.coeffs[k] * b.coeffs[j]
        if not w:
            continue
        for i in range(n):
            if vec[i]:
                out[i] = out[i] + w * P._emb(vec[i], on)
    ra = anchor_apply(P, a)
    rb = anchor_apply(P, b)
    for i in range(n):
        out[i] = out[i] + ra(b.coeffs[i]) - rb(a.coeffs[i])
    return Section(tuple(out))


def check_axioms(P: AlgebroidPresentation) -> CertReport:
    rep = CertReport(name=f"axioms[{P.name}]")
    fr = P.frames()
    for j, k in combinations(range(P.rank), 2):
        lhs = anchor_apply(P, bracket_sections(P, fr[j], fr[k]))
        rhs = anchor_apply(P, fr[j]).bracket(anchor_apply(P, fr[k]))
        diff = lhs - rhs
        rep.record("anchor-morphism", f"(e{j + 1},e{k + 1})", _VFResidual(diff))
    for i, j, k in combinations(range(P.rank), 3):
        t1 = bracket_sections(P, bracket_sections(P, fr[i], fr[j]), fr[k])
        t2 = bracket_sections(P, bracket_sections(P, fr[j], fr[k]), fr[i])
        t3 = bracket_sections(P, bracket_sections(P, fr[k], fr[i]), fr[j])
        rep.record("jacobi", f"(e{i + 1},e{j + 1},e{k + 1})", _SecResidual(t1 + t2 + t3))
    return rep


class _VFResidual:
    def __init__(self, X: PolyVectorField):
        self.X = X

    def is_zero(self):
        return self.X.is_zero()

    def __str__(self):
        return str(self.X)


class _SecResidual:
    def __init__(self, s: Section):
        self.s = s

    def is_zero(self):
        return self.s.is_zero()

    def __str__(self):
        return str(self.s)


# --- constructors -------------------------------------------------------------

def _consts_to_structure(c: Chart, n: int, consts) -> dict:
    """Accept {(j,k): [c^1..c^n]} (1-based pairs) or {(i,j,k): value} (1-based)."""
    st: dict = {}
    for key, val in consts.items():
        if len(key) == 2:
            j, k = key
            vec = [v if isinstance(v, Poly) else Poly.const(c, Fraction(v)) for v in val]
            st[(j - 1, k - 1)] = vec
        else:
            i, j, k = key
            if j == k:
                continue
            jj, kk, sgn = (j, k, 1) if j < k else (k, j, -1)
            vec = st.setdefault((jj - 1, kk - 1), [Poly.zero(c)] * n)
            vec[i - 1] = vec[i - 1] + Poly.const(c, Fraction(val) * sgn)
    return st


def lie_algebra(n: int, consts, name: str = "lie") -> AlgebroidPresentation:
    """Lie algebra over a point; ``consts`` as in :func:`_consts_to_structure`."""
    pt = Chart(())
    return AlgebroidPresentation(pt, n, [[] for _ in range(n)], _consts_to_structure(pt, n, consts), name=name)


def abelian(n: int) -> AlgebroidPresentation:
    return lie_algebra(n, {}, name=f"abelian{n}")


def so3() -> AlgebroidPresentation:
    return lie_algebra(3, {(3, 1, 2): 1, (1, 2, 3): 1, (2, 3, 1): 1}, name="so3")


def heis3() -> AlgebroidPresentation:
    return lie_algebra(3, {(3, 1, 2): 1}, name="heis3")


def tangent(m: int, names: Sequence[str] | None = None) -> AlgebroidPresentation:
    if names is None:
        names = ["x", "y", "z"][:m] if m <= 3 else [f"x{a + 1}" for a in range(m)]
    if len(names) != m:
        raise AlgebroidError("one name per coordinate required")
    c = Chart(tuple(names))
    anchor = [[Poly.const(c, 1 if a == i else 0) for a in range(m)] for i in range(m)]
    return AlgebroidPresentation(c, m, anchor, {}, name=f"tangent{m}")


def action(consts, fields: Sequence[PolyVectorField], name: str = "action") -> AlgebroidPresentation:
    """Action algebroid g ⋉ M for an infinitesimal action rho(e_i) = fields[i]."""
    if not fields:
        raise AlgebroidError("action needs at least one vector field")
    c = fields[0].chart
    n = len(fields)
    st = _consts_to_structure(c, n, consts)
    for vec in st.values():
        if not all(p.is_constant() for p in vec):
            raise AlgebroidError("action algebroid needs constant structure constants")
    anchor = [list(X.components) for X in fields]
    P = AlgebroidPresentation(c, n, anchor, st, name=name)
    for j, k in combinations(range(n), 2):
        lhs = fields[j].bracket(fields[k])
        rhs = PolyVectorField.zero(c)
        for i in range(n):
            ci = P.c(i, j, k)
            if ci:
                rhs = rhs + fields[i].scale(ci)
        if not (lhs - rhs).is_zero():
            raise AlgebroidError(
                f"vector fields do not represent the Lie algebra: [X{j + 1},X{k + 1}] - c X = {lhs - rhs}")
    return P


def so3_rotation_fields(c: Chart | None = None) -> list[PolyVectorField]:
    c = c or chart("x", "y", "z")
    return [
        PolyVectorField.from_strings(c, ["0", "z", "-y"]),
        PolyVectorField.from_strings(c, ["-z", "0", "x"]),
        PolyVectorField.from_strings(c, ["y", "-x", "0"]),
    ]


def so3_action() -> AlgebroidPresentation:
    return action({(3, 1, 2): 1, (1, 2, 3): 1, (2, 3, 1): 1}, so3_rotation_fields(), name="so3xR3")


def cotangent_poisson(pi: Poly | str, c: Chart | None = None, name: str | None = None) -> AlgebroidPresentation:
    """T*M for pi = f d/dx ∧ d/dy on R^2, frame (dx, dy), rho(xi) = pi(xi, .).

    This gives rho(dx) = f d/dy, rho(dy) = -f d/dx and [dx, dy] = d{x,y} = df.
    """
    if isinstance(pi, str):
        c = c or chart("x", "y")
        label = pi
        pi = poly_parse(pi, c)
    else:
        label = str(pi)
    c = pi.chart
    if c.dim != 2:
        raise AlgebroidError(f"cotangent_poisson supports base dimension 2 only, got {c.dim}")
    x, y = c.coords
    z = Poly.zero(c)
    anchor = [[z, pi], [-pi, z]]
    st = {(0, 1): [pi.partial(x), pi.partial(y)]}
    return AlgebroidPresentation(c, 2, anchor, st, name=name or f"poisson({label})")


def library() -> dict[str, AlgebroidPresentation]:
    """The certification library used throughout the test suite."""
    return {
        "abelian2": abelian(2),
        "so3": so3(),
        "heis3": heis3(),
        "tangent1": tangent(1),
        "tangent2": tangent(2),
        "so3xR3": so3_action(),
        "poisson_x": cotangent_poisson("x"),
        "poisson_1+x^2": cotangent_poisson("1+x^2"),
    }
