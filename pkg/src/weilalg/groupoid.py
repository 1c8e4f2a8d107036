"""Split polynomial groupoids, their nerves, the Bott–Shulman complex, the
operators R_a / J_a and the Van Est map into the flat Weil model.

An arrow is (u; x) with u in the fiber F = R^d and x = s(u; x) its source.  A
string (g_1, ..., g_p) of composable arrows has coordinates (u_1, ..., u_p; x)
with x = x_p the source of g_p and x_{j-1} = t(u_j; x_j).  The product g·h of
g = (u_g; t(u_h; x)) and h = (u_h; x) is (mult(u_g, u_h, x); x).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, permutations
from typing import Sequence

from .algebroid import AlgebroidPresentation, Section
from .exactpoly import Chart, ChartError, Poly, PolyMap, poly_substitute
from .intrinsic import reconstruct
from .polyforms import PolyForm, PolyVectorField, d_function, form_d, form_interior, form_lie, form_pullback, form_wedge
from .report import CertReport
from .weilflat import WeilElement, random_poly, weil_dh, weil_dv


class GroupoidError(ValueError):
    pass


class NotNormalized(ValueError):
    def __init__(self, index: int, residual):
        super().__init__(f"s_{index}^* of the form is {residual}, not 0")
        self.index = index
        self.residual = residual


class _Vec:
    """Tuple of polynomials used as a residual."""

    def __init__(self, polys):
        self.polys = tuple(polys)

    def is_zero(self):
        return not any(self.polys)

    def __str__(self):
        return "(" + ", ".join(str(p) for p in self.polys) + ")"


class SplitGroupoid:
    def __init__(self, base: Chart, fiber: Sequence[str], target: Sequence[Poly], unit: Sequence[Poly],
                 mult: Sequence[Poly], inverse: Sequence[Poly], name: str = "groupoid", naming: str = "indexed"):
        self.M = base
        self.fiber = tuple(fiber)
        self.d = len(self.fiber)
        self.m = base.dim
        self.name = name
        if naming not in ("indexed", "pair"):
            raise GroupoidError(f"unknown nerve naming {naming!r}")
        if naming == "pair" and self.d != self.m:
            raise GroupoidError("pair naming needs fiber dimension = base dimension")
        self.naming = naming
        self.arrow = Chart(self.fiber + base.coords)
        self.fiber_chart = Chart(self.fiber)
        self.mult_chart = Chart(tuple(f"{u}_g" for u in self.fiber) + tuple(f"{u}_h" for u in self.fiber)
                                + base.coords)
        self.target = PolyMap(self.arrow, base, tuple(target))
        self.unit = PolyMap(base, self.fiber_chart, tuple(unit))
        self.mult = PolyMap(self.mult_chart, self.fiber_chart, tuple(mult))
        self.inverse = PolyMap(self.arrow, self.fiber_chart, tuple(inverse))
        self._nerve: dict = {}
        self._maps: dict = {}

    @classmethod
    def from_strings(cls, base: Chart, fiber: Sequence[str], target, unit, mult, inverse, **kw):
        from .exactpoly import poly_parse

        arrow = Chart(tuple(fiber) + base.coords)
        mc = Chart(tuple(f"{u}_g" for u in fiber) + tuple(f"{u}_h" for u in fiber) + base.coords)
        return cls(base, fiber, [poly_parse(s, arrow) for s in target], [poly_parse(s, base) for s in unit],
                   [poly_parse(s, mc) for s in mult], [poly_parse(s, arrow) for s in inverse], **kw)

    def __repr__(self):
        return f"SplitGroupoid({self.name}: fiber {list(self.fiber)} over {self.M})"

    # --- nerve charts --------------------------------------------------------------------
    def nerve_names(self, p: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
        """(fiber coordinate names for g_1..g_p flattened, base names) on G_p."""
        if p == 0:
            return (), self.M.coords
        if self.naming == "pair":
            us = tuple(f"{x}{j - 1}" for j in range(1, p + 1) for x in self.M.coords)
        else:
            us = tuple(f"{u}{j}" for j in range(1, p + 1) for u in self.fiber)
        return us, tuple(f"{x}{p}" for x in self.M.coords)

    def nerve(self, p: int) -> "NerveChart":
        if p < 0:
            raise GroupoidError("negative nerve level")
        hit = self._nerve.get(p)
        if hit is None:
            hit = NerveChart(self, p)
            self._nerve[p] = hit
        return hit

    def face(self, p: int, i: int) -> PolyMap:
        """d_i: G_p -> G_{p-1}."""
        if p < 1 or not 0 <= i <= p:
            raise GroupoidError(f"face d_{i} undefined on G_{p}")
        key = ("d", p, i)
        hit = self._maps.get(key)
        if hit is not None:
            return hit
        N, T = self.nerve(p), self.nerve(p - 1)
        us = [N.u(j) for j in range(1, p + 1)]
        if i == 0:
            comps = [c for j in range(2, p + 1) for c in N.u(j)] + list(N.x(p))
        elif i < p:
            merged = N.mult_at(i)
            blocks = us[: i - 1] + [merged] + us[i + 1:]
            comps = [c for b in blocks for c in b] + list(N.x(p))
        else:
            comps = [c for b in us[:-1] for c in b] + list(N.x(p - 1))
        out = PolyMap(N.chart, T.chart, tuple(comps))
        self._maps[key] = out
        return out

    def degeneracy(self, p: int, i: int) -> PolyMap:
        """s_i: G_p -> G_{p+1}, inserting a unit at place i + 1."""
        if p < 0 or not 0 <= i <= p:
            raise GroupoidError(f"degeneracy s_{i} undefined on G_{p}")
        key = ("s", p, i)
        hit = self._maps.get(key)
        if hit is not None:
            return hit
        N, T = self.nerve(p), self.nerve(p + 1)
        us = [N.u(j) for j in range(1, p + 1)]
        unit = [c.substitute(list(N.x(i)), N.chart) for c in self.unit.components]
        blocks = us[:i] + [unit] + us[i:]
        comps = [c for b in blocks for c in b] + list(N.x(p))
        out = PolyMap(N.chart, T.chart, tuple(comps))
        self._maps[key] = out
        return out

    def target_map(self, p: int) -> PolyMap:
        """G_p -> M, (g_1, ..., g_p) -> t(g_1) = x_0."""
        key = ("t", p)
        hit = self._maps.get(key)
        if hit is None:
            N = self.nerve(p)
            hit = PolyMap(N.chart, self.M, tuple(N.x(0)))
            self._maps[key] = hit
        return hit

    @cached_property
    def is_linear(self) -> bool:
        maps = list(self.target.components) + list(self.unit.components) + list(self.mult.components)
        return all(c.degree() <= 1 for c in maps)


class NerveChart:
    def __init__(self, G: SplitGroupoid, p: int):
        self.G, self.p = G, p
        us, xs = G.nerve_names(p)
        try:
            self.chart = Chart(us + xs)
        except ChartError as exc:
            raise GroupoidError(f"nerve chart names collide: {exc}") from None
        self.u_names = us
        self.x_names = xs
        d = G.d
        self._u = [tuple(Poly.var(self.chart, n) for n in us[j * d:(j + 1) * d]) for j in range(p)]
        xs_p = tuple(Poly.var(self.chart, n) for n in xs)
        xs_all = [None] * (p + 1)
        xs_all[p] = xs_p
        for j in range(p, 0, -1):
            args = list(self._u[j - 1]) + list(xs_all[j])
            xs_all[j - 1] = tuple(c.substitute(args, self.chart) for c in G.target.components)
        self._x = xs_all

    def u(self, j: int) -> tuple[Poly, ...]:
        """Fiber coordinates of g_j (1-based)."""
        return self._u[j - 1]

    def x(self, j: int) -> tuple[Poly, ...]:
        """x_j: source of g_j (x_0 is the target of g_1)."""
        return self._x[j]

    def mult_at(self, i: int) -> tuple[Poly, ...]:
        """Fiber coordinates of g_i g_{i+1}."""
        args = list(self.u(i)) + list(self.u(i + 1)) + list(self.x(i + 1))
        return tuple(c.substitute(args, self.chart) for c in self.G.mult.components)

    def u_index(self, j: int, k: int) -> int:
        return (j - 1) * self.G.d + k


# --- structure checks ------------------------------------------------------------------

def check_groupoid(G: SplitGroupoid) -> CertReport:
    rep = CertReport(name=f"groupoid[{G.name}]")
    M = G.M
    x = [Poly.var(M, n) for n in M.coords]
    u0 = list(G.unit.components)
    # t(1_x) = x
    t_unit = [c.substitute(u0 + x, M) for c in G.target.components]
    rep.record("t(1_x) = x", "M", _Vec(a - b for a, b in zip(t_unit, x)))
    # composable triples chart
    C = Chart(tuple(f"{u}_a" for u in G.fiber) + tuple(f"{u}_b" for u in G.fiber)
              + tuple(f"{u}_c" for u in G.fiber) + M.coords)
    ua = [Poly.var(C, f"{u}_a") for u in G.fiber]
    ub = [Poly.var(C, f"{u}_b") for u in G.fiber]
    uc = [Poly.var(C, f"{u}_c") for u in G.fiber]
    xc = [Poly.var(C, n) for n in M.coords]

    def t(u, xx):
        return [c.substitute(list(u) + list(xx), C) for c in G.target.components]

    def m(ug, uh, xx):
        return [c.substitute(list(ug) + list(uh) + list(xx), C) for c in G.mult.components]

    def unit(xx):
        return [c.substitute(list(xx), C) for c in G.unit.components]

    def inv(u, xx):
        return [c.substitute(list(u) + list(xx), C) for c in G.inverse.components]

    xb = t(uc, xc)          # source of b, target of c
    # t(b c) = t(b)
    rep.record("t(gh) = t(g)", "(b, c)", _Vec(a - b for a, b in zip(t(m(ub, uc, xc), xc), t(ub, xb))))
    # unit laws
    rep.record("1_{t(h)} h = h", "c", _Vec(a - b for a, b in zip(m(unit(xb), uc, xc), uc)))
    rep.record("g 1_{s(g)} = g", "b", _Vec(a - b for a, b in zip(m(ub, unit(xc), xc), ub)))
    # associativity
    lhs = m(m(ua, ub, xb), uc, xc)
    rhs = m(ua, m(ub, uc, xc), xc)
    rep.record("(gh)k = g(hk)", "(a, b, c)", _Vec(a - b for a, b in zip(lhs, rhs)))
    # inverses
    ic = inv(uc, xc)
    rep.record("t(g^-1) = s(g)", "c", _Vec(a - b for a, b in zip(t(ic, xb), xc)))
    rep.record("g^-1 g = 1", "c", _Vec(a - b for a, b in zip(m(ic, uc, xc), unit(xc))))
    rep.record("g g^-1 = 1", "c", _Vec(a - b for a, b in zip(m(uc, ic, xb), unit(xb))))
    return rep


def check_simplicial(G: SplitGroupoid, pmax: int = 4) -> CertReport:
    """Simplicial identities among the face and degeneracy PolyMaps."""
    rep = CertReport(name=f"simplicial[{G.name}]")

    def eq(name, where, f, g):
        rep.record(name, where, _Vec(a - b for a, b in zip(f.components, g.components)))

    for p in range(2, pmax + 1):
        for i in range(p):
            for j in range(i + 1, p + 1):
                # d_i d_j = d_{j-1} d_i on G_p
                eq("d_i d_j = d_{j-1} d_i", f"p={p},i={i},j={j}",
                   G.face(p - 1, i).compose(G.face(p, j)), G.face(p - 1, j - 1).compose(G.face(p, i)))
    for p in range(0, pmax):
        for i in range(p + 1):
            for j in range(i, p + 1):
                # s_i s_j = s_{j+1} s_i on G_p
                eq("s_i s_j = s_{j+1} s_i", f"p={p},i={i},j={j}",
                   G.degeneracy(p + 1, i).compose(G.degeneracy(p, j)),
                   G.degeneracy(p + 1, j + 1).compose(G.degeneracy(p, i)))
            for j in range(p + 2):
                comp = G.face(p + 1, j).compose(G.degeneracy(p, i))
                if j < i:
                    if p == 0:
                        continue
                    eq("d_j s_i = s_{i-1} d_j", f"p={p},i={i},j={j}", comp,
                       G.degeneracy(p - 1, i - 1).compose(G.face(p, j)))
                elif j in (i, i + 1):
                    eq("d_j s_i = id", f"p={p},i={i},j={j}", comp, PolyMap.identity(G.nerve(p).chart))
                else:
                    if p == 0:
                        continue
                    eq("d_j s_i = s_i d_{j-1}", f"p={p},i={i},j={j}", comp,
                       G.degeneracy(p - 1, i).compose(G.face(p, j - 1)))
    return rep


# --- Bott–Shulman forms ---------------------------------------------------------------------

@dataclass(frozen=True)
class BSForm:
    G: SplitGroupoid
    p: int
    form: PolyForm

    def __post_init__(self):
        if self.form.chart.coords != self.G.nerve(self.p).chart.coords:
            raise ChartError(f"form chart {self.form.chart} is not the chart of G_{self.p}")

    @classmethod
    def parse(cls, G: SplitGroupoid, p: int, text: str) -> "BSForm":
        return cls(G, p, PolyForm.parse(text, G.nerve(p).chart))

    def __add__(self, other: "BSForm"):
        if other.p != self.p:
            raise ValueError("levels differ")
        a, b = _align_forms(self.form, other.form)
        return BSForm(self.G, self.p, a + b)

    def __neg__(self):
        return BSForm(self.G, self.p, -self.form)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "BSForm":
        return BSForm(self.G, self.p, self.form.scale(c))

    def wedge(self, other: "BSForm") -> "BSForm":
        """Pointwise wedge on the same G_p (not the cup product)."""
        a, b = _align_forms(self.form, other.form)
        return BSForm(self.G, self.p, form_wedge(a, b))

    def d(self) -> "BSForm":
        return BSForm(self.G, self.p, form_d(self.form))

    def is_zero(self) -> bool:
        return self.form.is_zero()

    @property
    def degree(self) -> int:
        return self.form.degree()

    def __str__(self):
        return str(self.form)


def _align_forms(a: PolyForm, b: PolyForm):
    if a.chart == b.chart:
        return a, b
    from .exactpoly import common_chart

    c = common_chart(a.chart, b.chart)
    return a.embed(c), b.embed(c)


def _align_field(X: PolyVectorField, w: PolyForm):
    if X.chart == w.chart:
        return X, w
    from .exactpoly import common_chart

    c = common_chart(X.chart, w.chart)
    return X.embed(c), w.embed(c)


def pullback(m: PolyMap, w: BSForm, p_out: int) -> BSForm:
    return BSForm(w.G, p_out, form_pullback(m, w.form))


def face_pullback(w: BSForm, i: int) -> BSForm:
    """d_i^*: Omega(G_p) -> Omega(G_{p+1})."""
    return pullback(w.G.face(w.p + 1, i), w, w.p + 1)


def degeneracy_pullback(w: BSForm, i: int) -> BSForm:
    """s_i^*: Omega(G_p) -> Omega(G_{p-1})."""
    if w.p < 1:
        raise GroupoidError("no degeneracies into G_{-1}")
    return pullback(w.G.degeneracy(w.p - 1, i), w, w.p - 1)


def target_pullback(G: SplitGroupoid, p: int, phi: PolyForm) -> BSForm:
    """Pull a form on M back along (g_1, ..., g_p) -> t(g_1)."""
    return BSForm(G, p, form_pullback(G.target_map(p), phi))


def bs_delta(w: BSForm) -> BSForm:
    out = None
    for i in range(w.p + 2):
        term = face_pullback(w, i)
        if i & 1:
            term = -term
        out = term if out is None else out + term
    return out


def is_normalized(w: BSForm) -> bool:
    return all(degeneracy_pullback(w, i).is_zero() for i in range(w.p))


def normalization_failure(w: BSForm):
    for i in range(w.p):
        r = degeneracy_pullback(w, i)
        if not r.is_zero():
            return i, r
    return None


# --- right-invariant fields, the algebroid, R and J -------------------------------------------

def _mult_jacobian(G: SplitGroupoid):
    """d mult / d u_g as a d x d matrix on the mult chart: [k][l] = d m_l / d u_g,k."""
    hit = G._maps.get("jac")
    if hit is None:
        hit = [[G.mult.components[l].partial(f"{G.fiber[k]}_g") for l in range(G.d)] for k in range(G.d)]
        G._maps["jac"] = hit
    return hit


def _jacobian_on_nerve(G: SplitGroupoid, p: int):
    key = ("jacN", p)
    hit = G._maps.get(key)
    if hit is None:
        N = G.nerve(p)
        unit0 = [c.substitute(list(N.x(0)), N.chart) for c in G.unit.components]
        args = unit0 + list(N.u(1)) + list(N.x(1))
        hit = [[e.substitute(args, N.chart) for e in row] for row in _mult_jacobian(G)]
        G._maps[key] = hit
    return hit


def right_invariant_vf(G: SplitGroupoid, a: Section, p: int) -> PolyVectorField:
    """alpha^p on G_p: the derivative of (v) -> ((v; x_0) g_1, g_2, ..., g_p) along a(x_0)."""
    if p < 1:
        raise GroupoidError("right-invariant fields live on G_p with p >= 1")
    if a.rank != G.d:
        raise GroupoidError(f"section of rank {a.rank}, groupoid fiber has dimension {G.d}")
    if a.chart.coords != G.M.coords:
        raise ChartError("section must live on the object chart")
    N = G.nerve(p)
    tm = G.target_map(p)
    coeffs = [poly_substitute(c, tm) for c in a.coeffs]
    chart = coeffs[0].chart if coeffs else N.chart
    jac = _jacobian_on_nerve(G, p)
    comps = [Poly.zero(chart)] * N.chart.dim
    for k in range(G.d):
        if not coeffs[k]:
            continue
        for l in range(G.d):
            j = jac[k][l]
            if j:
                idx = N.u_index(1, l)
                comps[idx] = comps[idx] + coeffs[k] * j.embed(chart)
    return PolyVectorField(chart, comps)


def lie_algebroid_of(G: SplitGroupoid) -> AlgebroidPresentation:
    hit = G._maps.get("algebroid")
    if hit is not None:
        return hit
    M = G.M
    x = [Poly.var(M, n) for n in M.coords]
    at_unit = list(G.unit.components) + x
    anchor = [[G.target.components[a].partial(G.fiber[i]).substitute(at_unit, M) for a in range(G.m)]
              for i in range(G.d)]
    frames = [right_invariant_vf(G, Section.frame(M, G.d, i), 1) for i in range(G.d)]
    s0 = G.degeneracy(0, 0)
    N1 = G.nerve(1)
    structure = {}
    for j, k in combinations(range(G.d), 2):
        br = frames[j].bracket(frames[k])
        vec = [br.components[N1.u_index(1, i)].substitute(list(s0.components), M) for i in range(G.d)]
        if any(vec):
            structure[(j, k)] = vec
    out = AlgebroidPresentation(M, G.d, anchor, structure, name=f"A({G.name})")
    G._maps["algebroid"] = out
    return out


def _check_level(w: BSForm):
    if w.p < 1:
        raise GroupoidError("R and J need a form on G_p with p >= 1")


def R_op(a: Section, w: BSForm) -> BSForm:
    """R_a(w) = s_0^*(L_{a^p} w)."""
    _check_level(w)
    X, f = _align_field(right_invariant_vf(w.G, a, w.p), w.form)
    return pullback(w.G.degeneracy(w.p - 1, 0), BSForm(w.G, w.p, form_lie(X, f)), w.p - 1)


def J_op(a: Section, w: BSForm) -> BSForm:
    """J_a(w) = s_0^*(i_{a^p} w)."""
    _check_level(w)
    X, f = _align_field(right_invariant_vf(w.G, a, w.p), w.form)
    return pullback(w.G.degeneracy(w.p - 1, 0), BSForm(w.G, w.p, form_interior(X, f)), w.p - 1)


def lie_along(a: Section, w: BSForm) -> BSForm:
    """L_{a^p} on G_p (p >= 1), L_{rho(a)} on M (p = 0)."""
    if w.p == 0:
        from .algebroid import anchor_apply

        X = anchor_apply(lie_algebroid_of(w.G), a)
    else:
        X = right_invariant_vf(w.G, a, w.p)
    X, f = _align_field(X, w.form)
    return BSForm(w.G, w.p, form_lie(X, f))


def interior_along(a: Section, w: BSForm) -> BSForm:
    if w.p == 0:
        from .algebroid import anchor_apply

        X = anchor_apply(lie_algebroid_of(w.G), a)
    else:
        X = right_invariant_vf(w.G, a, w.p)
    X, f = _align_field(X, w.form)
    return BSForm(w.G, w.p, form_interior(X, f))


# --- the Van Est map -------------------------------------------------------------------------

def shuffle_perms(p: int, i: int):
    """S_p(i) as (sequence of labels sigma(1..p), sign); labels > p - i occur in increasing order."""
    out = []
    for perm in permutations(range(1, p + 1)):
        pos = [perm.index(k) for k in range(p - i + 1, p + 1)]
        if all(pos[r] < pos[r + 1] for r in range(len(pos) - 1)):
            inv = sum(1 for r in range(p) for s in range(r + 1, p) if perm[r] > perm[s])
            out.append((perm, -1 if inv & 1 else 1))
    return out


def vanest_component(w: BSForm, antisym: Sequence[Section], sym: Section | None, i: int) -> PolyForm:
    """V(w)_i(a_1, ..., a_{p-i} | a) as a form on M."""
    p = w.p
    if len(antisym) != p - i or i < 0:
        raise ValueError(f"level {i} needs {p - i} antisymmetric arguments")
    if i > 0 and sym is None:
        raise ValueError("symmetric argument required for level > 0")
    memo: dict = {}

    def apply(ops: tuple) -> BSForm:
        # ops = labels for D_s, ..., D_p; D_p acts first
        if not ops:
            return w
        hit = memo.get(ops)
        if hit is None:
            inner = apply(ops[1:])
            k = ops[0]
            hit = J_op(sym, inner) if k > p - i else R_op(antisym[k - 1], inner)
            memo[ops] = hit
        return hit

    total = None
    gsign = -1 if (p * (p + 1) // 2) & 1 else 1
    if i & 1:
        gsign = -gsign
    for perm, sgn in shuffle_perms(p, i):
        val = apply(tuple(perm)).form
        term = val if sgn * gsign > 0 else -val
        total = term if total is None else _sum(total, term)
    return total


def _sum(a: PolyForm, b: PolyForm) -> PolyForm:
    a, b = _align_forms(a, b)
    return a + b


def vanest(w: BSForm, check: bool = True) -> WeilElement:
    """V(w) in W^{p,q} of the Lie algebroid, reconstructed in flat coordinates."""
    if check:
        bad = normalization_failure(w)
        if bad is not None:
            raise NotNormalized(*bad)
    P = lie_algebroid_of(w.G)
    p = w.p
    q = w.form.degree() if not w.form.is_zero() else 0
    if w.form.is_zero():
        return WeilElement.zero(P)
    if len(w.form.degrees()) > 1:
        raise ValueError("vanest needs a homogeneous form")
    frames = {}

    def comp(i, J, alpha):
        secs = [frames.setdefault(j, Section.frame(alpha.chart, P.rank, j)) for j in J]
        out = vanest_component(w, secs, alpha, i)
        return out if out is not None else PolyForm.zero(alpha.chart)

    return reconstruct(P, p, q, comp)


def compatibility_check(w: BSForm) -> CertReport:
    """V(dw) = (-1)^p d^v V(w) and V(delta w) = d^h V(w)."""
    rep = CertReport(name=f"vanest-compat[{w.G.name}]")
    V = vanest(w)
    Vd = vanest(w.d())
    dvV = weil_dv(V)
    rep.record("V d = (-1)^p d^v V", f"p={w.p}: {w.form}", Vd - (dvV if w.p % 2 == 0 else -dvV))
    Vdelta = vanest(bs_delta(w))
    rep.record("V delta = d^h V", f"p={w.p}: {w.form}", Vdelta - weil_dh(V))
    return rep


# --- multiplicative forms --------------------------------------------------------------------

def multiplicative_check(G: SplitGroupoid, omega: PolyForm, phi: PolyForm | None = None) -> CertReport:
    rep = CertReport(name=f"multiplicative[{G.name}]")
    w = BSForm(G, 1, omega)
    lhs = face_pullback(w, 1) - face_pullback(w, 0) - face_pullback(w, 2)
    rep.record("d1* w = d0* w + d2* w", "G_2", lhs.form)
    if phi is not None:
        if not form_d(phi).is_zero():
            raise ValueError("phi is not closed")
        p0 = BSForm(G, 0, phi)
        rel = w.d() - face_pullback(p0, 0) + face_pullback(p0, 1)
        rep.record("d w = s* phi - t* phi", "G_1", rel.form)
    return rep


# --- library -----------------------------------------------------------------------------------

def pair_groupoid(m: int = 1) -> SplitGroupoid:
    names = ["x", "y", "z"][:m] if m <= 3 else [f"x{a + 1}" for a in range(m)]
    M = Chart(tuple(names))
    fiber = [f"t{n}" for n in names]
    return SplitGroupoid.from_strings(M, fiber, target=fiber, unit=names,
                                      mult=[f"{f}_g" for f in fiber], inverse=names,
                                      name=f"pair{m}", naming="pair")


def translation_groupoid() -> SplitGroupoid:
    """R acting on R by translations: t(u; x) = x + u."""
    M = Chart(("x",))
    return SplitGroupoid.from_strings(M, ["u"], target=["x + u"], unit=["0"], mult=["u_g + u_h"],
                                      inverse=["-u"], name="RxR")


def heisenberg_group() -> SplitGroupoid:
    """(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab') over a point."""
    M = Chart(())
    return SplitGroupoid.from_strings(M, ["a", "b", "c"], target=[], unit=["0", "0", "0"],
                                      mult=["a_g + a_h", "b_g + b_h", "c_g + c_h + a_g*b_h"],
                                      inverse=["-a", "-b", "-c + a*b"], name="H3")


def affine_line_group() -> SplitGroupoid:
    """Translations of R together with a scaling-free shear: R^2 acting on R by (a, b).x = x + a."""
    M = Chart(("x",))
    return SplitGroupoid.from_strings(M, ["a", "b"], target=["x + a"], unit=["0", "0"],
                                      mult=["a_g + a_h", "b_g + b_h + a_g*a_h"],
                                      inverse=["-a", "-b + a^2"], name="R2xR")


def perturbed_mult_groupoid() -> SplitGroupoid:
    """Translation groupoid with a quadratic term in the product (not associative)."""
    M = Chart(("x",))
    return SplitGroupoid.from_strings(M, ["u"], target=["x + u"], unit=["0"], mult=["u_g + u_h + u_g*u_h^2"],
                                      inverse=["-u"], name="RxR-broken")


def groupoid_library() -> dict[str, SplitGroupoid]:
    return {"pair1": pair_groupoid(1), "pair2": pair_groupoid(2), "RxR": translation_groupoid(),
            "H3": heisenberg_group()}


# --- random normalized forms --------------------------------------------------------------------

def unit_defect(G: SplitGroupoid, p: int, j: int, k: int) -> Poly:
    """u_{j,k} - u0_k(x_j): vanishes where g_j is a unit."""
    N = G.nerve(p)
    u0 = G.unit.components[k].substitute(list(N.x(j)), N.chart)
    return N.u(j)[k] - u0


def random_normalized_form(G: SplitGroupoid, p: int, q: int, rng: random.Random, max_degree: int = 1) -> BSForm:
    """Product over j of a unit defect at g_j (or its differential), times a random form."""
    N = G.nerve(p)
    c = N.chart
    if q > c.dim:
        return BSForm(G, p, PolyForm.zero(c))
    while True:
        n_d = rng.randint(0, min(p, q))
        d_pos = set(rng.sample(range(1, p + 1), n_d))
        out = PolyForm.const(c, 1)
        for j in range(1, p + 1):
            f = unit_defect(G, p, j, rng.randrange(G.d))
            out = form_wedge(out, d_function(f) if j in d_pos else PolyForm.function(f))
        r = q - n_d
        extra = PolyForm.zero(c)
        for _ in range(rng.randint(1, 2)):
            I = tuple(sorted(rng.sample(range(c.dim), r)))
            extra = extra + PolyForm.basis(c, I, random_poly(c, rng, max_degree, 2))
        out = form_wedge(out, extra)
        if out:
            return BSForm(G, p, out)
