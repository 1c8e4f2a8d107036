"""Component-sequence view of flat Weil elements.

An element of bidegree (p, q) is evaluated at level i on p-i sections (the
antisymmetric slots) and one section in the symmetric slot, giving a form of
degree q-i on the base.  The symmetric slot is usually the formal section
``sum_j lam_j e_j`` over a chart extended by parameters ``_lam1..``; polynomial
dependence on it then carries the whole symmetric tensor.

Generators evaluate as: f -> f, d^a -> dx_a, th^i(a) -> g^i, and mu^i has level-0
part a -> -d(g^i) and level-1 part a -> g^i, where a = sum g^j e_j.  Products
follow the shuffle rule with the sign (-1)^{(form degree of left) * (slots of right)}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Mapping, Sequence

from .algebroid import AlgebroidError, AlgebroidPresentation, Section, anchor_apply, bracket_sections
from .exactpoly import Chart, ChartError, Poly, chart_extend, common_chart
from .polyforms import PolyForm, d_function, form_d, form_interior, form_lie, form_wedge
from .report import CertReport
from .weilflat import WeilElement, weil_dh, weil_dv, weil_product

T_PARAM = "_t"


def lam_names(n: int) -> list[str]:
    return [f"_lam{j + 1}" for j in range(n)]


def lambda_chart(P: AlgebroidPresentation, extra: Sequence[str] = ()) -> Chart:
    return chart_extend(P.base, lam_names(P.rank) + list(extra))


def lambda_section(P: AlgebroidPresentation, on: Chart | None = None) -> Section:
    on = on or lambda_chart(P)
    return Section(tuple(Poly.var(on, nm) for nm in lam_names(P.rank)))


@dataclass
class ComponentQuery:
    element: WeilElement
    antisym: Sequence[Section]
    sym: Section | None = None
    level: int = 0


class LevelError(ValueError):
    pass


def _working_chart(P: AlgebroidPresentation, sections: Sequence[Section | None]) -> Chart:
    charts = [s.chart for s in sections if s is not None and s.rank]
    for s in sections:
        if s is not None and s.rank != P.rank:
            raise AlgebroidError(f"section of rank {s.rank} for algebroid of rank {P.rank}")
    if not charts:
        return P.base
    c = common_chart(P.base, *charts)
    return c


def _eval(w: WeilElement, antisym: Sequence[Section], sym: Section | None, level: int,
          on: Chart | None = None) -> PolyForm:
    """Level-``level`` evaluation of the part of ``w`` with p = len(antisym) + level."""
    P = w.P
    W = on or _working_chart(P, list(antisym) + [sym])
    r = len(antisym)
    p = r + level
    out = PolyForm.zero(W)
    if level < 0:
        return out
    args = [s.embed(W) for s in antisym]
    symw = sym.embed(W) if sym is not None else None
    gvals: dict = {}
    dgvals: dict = {}

    def g(j, i):
        key = (j, i)
        v = gvals.get(key)
        if v is None:
            v = args[j].coeffs[i]
            gvals[key] = v
        return v

    def dg(j, i):
        key = (j, i)
        v = dgvals.get(key)
        if v is None:
            v = -d_function(args[j].coeffs[i])
            dgvals[key] = v
        return v

    full = (1 << r) - 1
    for key, f in w.terms.items():
        D, T, e = key
        k = sum(e)
        if len(T) + k != p or k < level:
            continue
        if level and symw is None:
            raise LevelError("a symmetric argument is required for levels > 0")
        start = PolyForm.basis(W, D, f.embed(W)) if D else PolyForm.function(f.embed(W))
        states = {(0, 0): start}
        fd0 = len(D)
        mus = [i for i, m in enumerate(e) for _ in range(m)]
        need_args = len(T) + (k - level)
        if need_args != r:
            continue
        # theta factors: each consumes one slot
        for i in T:
            new: dict = {}
            for (mask, lvl), acc in states.items():
                for j in range(r):
                    bit = 1 << j
                    if mask & bit:
                        continue
                    gv = g(j, i)
                    if not gv:
                        continue
                    inv = bin(mask >> (j + 1)).count("1")
                    val = acc.scale(gv)
                    if (inv + fd0) & 1:
                        val = -val
                    kk = (mask | bit, lvl)
                    new[kk] = new[kk] + val if kk in new else val
            states = {kk: v for kk, v in new.items() if v}
            if not states:
                break
        if not states:
            continue
        for step, i in enumerate(mus):
            new = {}
            for (mask, lvl), acc in states.items():
                fd = fd0 + step - lvl
                # level-1 branch: no slot, a 0-form
                if lvl < level:
                    sv = symw.coeffs[i]
                    if sv:
                        kk = (mask, lvl + 1)
                        val = acc.scale(sv)
                        new[kk] = new[kk] + val if kk in new else val
                # level-0 branch: consumes a slot, a 1-form
                for j in range(r):
                    bit = 1 << j
                    if mask & bit:
                        continue
                    dv = dg(j, i)
                    if not dv:
                        continue
                    inv = bin(mask >> (j + 1)).count("1")
                    val = form_wedge(acc, dv)
                    if (inv + fd) & 1:
                        val = -val
                    kk = (mask | bit, lvl)
                    new[kk] = new[kk] + val if kk in new else val
            states = {kk: v for kk, v in new.items() if v}
            if not states:
                break
        res = states.get((full, level))
        if res:
            out = out + res
    return out


def eval_component(q: ComponentQuery | WeilElement, antisym: Sequence[Section] | None = None,
                   sym: Section | None = None, level: int | None = None) -> PolyForm:
    """c_i(a_1, ..., a_{p-i} | a) as a form on the (possibly parameter-extended) base chart."""
    if isinstance(q, ComponentQuery):
        w, antisym, sym, level = q.element, q.antisym, q.sym, q.level
    else:
        w = q
        antisym = antisym or []
        level = level or 0
    if level < 0:
        raise LevelError(f"negative level {level}")
    if w.terms:
        bd = w.bidegrees()
        if len(bd) == 1:
            p, qq = next(iter(bd))
            if level > min(p, qq):
                raise LevelError(f"level {level} out of range for bidegree {(p, qq)}")
            if len(antisym) != p - level:
                raise LevelError(f"expected {p - level} antisymmetric arguments, got {len(antisym)}")
    return _eval(w, antisym, sym, level)


# --- the oracle: component formulas for d^v and d^h ----------------------------------

def _t_chart(c: Chart) -> Chart:
    return c if T_PARAM in c.params else chart_extend(c, [T_PARAM])


def _t_derivative(form: PolyForm, target: Chart) -> PolyForm:
    """d/dt at t = 0, moved back to ``target`` (which lacks t)."""
    out = {}
    for k, v in form.comps.items():
        dv = v.partial(T_PARAM).evaluate({T_PARAM: 0}).restrict(target)
        if dv:
            out[k] = dv
    return PolyForm(target, out)


def sym_directional(w: WeilElement, antisym: Sequence[Section], sym: Section, level: int,
                    direction: Section, on: Chart) -> PolyForm:
    """partial_{direction} of c_level(antisym)(.) evaluated at sym, via a formal t."""
    if level <= 0:
        return PolyForm.zero(on)
    Wt = _t_chart(on)
    t = Poly.var(Wt, T_PARAM)
    moved = sym.embed(Wt) + direction.embed(Wt).scale(t)
    val = _eval(w, [a.embed(Wt) for a in antisym], moved, level, on=Wt)
    return _t_derivative(val, on)


def _p_of(w: WeilElement) -> tuple[int, int]:
    if not w.terms:
        raise ValueError("zero element has no bidegree; pass it explicitly")
    return w.bidegree()


def intrinsic_dv_component(w: WeilElement, antisym: Sequence[Section], sym: Section | None, k: int,
                           bidegree: tuple[int, int] | None = None) -> PolyForm:
    """(d^v c)_k(args|a) = (-1)^{p-k} (d c_k(args|a) + c_{k-1}(args, a | a))."""
    p, _ = bidegree or _p_of(w)
    P = w.P
    on = _working_chart(P, list(antisym) + [sym])
    res = form_d(_eval(w, antisym, sym, k, on=on))
    if k >= 1:
        if sym is None:
            raise LevelError("symmetric argument required for k >= 1")
        res = res + _eval(w, list(antisym) + [sym], sym, k - 1, on=on)
    return -res if (p - k) & 1 else res


def koszul_component(w: WeilElement, antisym: Sequence[Section], sym: Section | None, k: int,
                     on: Chart) -> PolyForm:
    """delta(c_k)(a_1..a_{N+1}|a) with the representation of sections on Omega(M; S A*)."""
    P = w.P
    args = [a.embed(on) for a in antisym]
    symw = sym.embed(on) if sym is not None else None
    N1 = len(args)
    out = PolyForm.zero(on)
    for i in range(N1):
        for j in range(i + 1, N1):
            br = bracket_sections(P, args[i], args[j])
            if br.is_zero():
                continue
            rest = [br] + [a for t, a in enumerate(args) if t != i and t != j]
            val = _eval(w, rest, symw, k, on=on)
            # (-1)^{i+j} with 1-based indices equals (-1)^{i+j} with 0-based ones
            out = out + (val if (i + j) % 2 == 0 else -val)
    for i in range(N1):
        beta = args[i]
        rest = [a for t, a in enumerate(args) if t != i]
        val = form_lie(anchor_apply(P, beta), _eval(w, rest, symw, k, on=on))
        if k >= 1:
            gamma = bracket_sections(P, beta, symw)
            if not gamma.is_zero():
                val = val - sym_directional(w, rest, symw, k, gamma, on)
        out = out + (val if i % 2 == 0 else -val)
    return out


def intrinsic_dh_component(w: WeilElement, antisym: Sequence[Section], sym: Section | None, k: int,
                           bidegree: tuple[int, int] | None = None) -> PolyForm:
    """(d^h c)_k(args|a) = delta(c_k)(args|a) + (-1)^{p-k} i_{rho(a)} c_{k-1}(args|a)."""
    p, _ = bidegree or _p_of(w)
    P = w.P
    on = _working_chart(P, list(antisym) + [sym])
    res = koszul_component(w, antisym, sym, k, on)
    if k >= 1:
        if sym is None:
            raise LevelError("symmetric argument required for k >= 1")
        symw = sym.embed(on)
        extra = form_interior(anchor_apply(P, symw), _eval(w, antisym, symw, k - 1, on=on))
        res = res + (-extra if (p - k) & 1 else extra)
    return res


def oracle_equality(w: WeilElement, antisym_dv: Sequence[Section], antisym_dh: Sequence[Section],
                    sym: Section, k_dv: int, k_dh: int) -> CertReport:
    """Compare eval(weil_dv w) / eval(weil_dh w) with the component formulas."""
    rep = CertReport(name="oracle")
    bd = w.bidegree()
    lhs = _eval(weil_dv(w), antisym_dv, sym, k_dv)
    rhs = intrinsic_dv_component(w, antisym_dv, sym, k_dv, bd)
    rep.record("dv-oracle", f"{w} k={k_dv}", lhs - rhs.embed(lhs.chart) if lhs.chart != rhs.chart else lhs - rhs)
    lhs = _eval(weil_dh(w), antisym_dh, sym, k_dh)
    rhs = intrinsic_dh_component(w, antisym_dh, sym, k_dh, bd)
    rep.record("dh-oracle", f"{w} k={k_dh}", lhs - rhs.embed(lhs.chart) if lhs.chart != rhs.chart else lhs - rhs)
    return rep


# --- Definition-level relation and determinacy ------------------------------------------

def leibniz_check(w: WeilElement, sections: Sequence[Section], f: Poly, sym: Section | None = None) -> CertReport:
    """c_i(a_1..f a_r) = f c_i(a_1..a_r) - df ^ partial_{a_r} c_{i+1}(a_1..a_{r-1}) at every level."""
    P = w.P
    rep = CertReport(name="leibniz")
    if not w.terms:
        return rep
    p, q = w.bidegree()
    sym = sym if sym is not None else lambda_section(P)
    on = _working_chart(P, list(sections) + [sym])
    fw = f.embed(on) if f.chart != on else f
    for i in range(0, min(p, q) + 1):
        r = p - i
        if r < 1:
            continue
        if len(sections) < r:
            raise ValueError(f"need at least {r} sections")
        args = [s.embed(on) for s in sections[:r]]
        scaled = args[:-1] + [args[-1].scale(fw)]
        lhs = _eval(w, scaled, sym, i, on=on)
        rhs = _eval(w, args, sym, i, on=on).scale(fw)
        corr = sym_directional(w, args[:-1], sym.embed(on), i + 1, args[-1], on)
        rhs = rhs - form_wedge(d_function(fw), corr)
        rep.record("def-relation", f"level {i}", lhs - rhs)
    return rep


def evaluation_sections(P: AlgebroidPresentation) -> list[Section]:
    """The frame evaluation set {e_j} ∪ {x_a e_j}."""
    out = [P.frame(j) for j in range(P.rank)]
    for a, nm in enumerate(P.base.coords):
        for j in range(P.rank):
            out.append(Section.frame(P.base, P.rank, j, Poly.var(P.base, nm)))
    return out


def body_determinacy(w: WeilElement, w2: WeilElement) -> bool:
    """Do the level-0 components agree on every tuple from the frame evaluation set?"""
    if w.P is not w2.P:
        raise AlgebroidError("presentation mismatch")
    bd = w.bidegrees() | w2.bidegrees()
    if len(bd) > 1:
        raise ValueError(f"bidegree mismatch: {sorted(bd)}")
    if not bd:
        return True
    p, q = next(iter(bd))
    diff = w - w2
    for combo in combinations(evaluation_sections(w.P), p):
        if _eval(diff, list(combo), None, 0):
            return False
    return True


# --- reconstruction from components on constant frames -------------------------------

def reconstruct(P: AlgebroidPresentation, p: int, q: int,
                component: Callable[[int, tuple[int, ...], Section], PolyForm]) -> WeilElement:
    """Rebuild a flat element from c_i(e_J | sum lam_j e_j) for all levels i and |J| = p - i.

    On constant frame sections only the monomials d^D th^J mu^e with |e| = i
    contribute to level i, each as (-1)^{|D||J|} f lam^e dx_D.
    """
    lc = lambda_chart(P)
    lam = lam_names(P.rank)
    alpha = lambda_section(P, lc)
    terms: dict = {}
    for i in range(0, min(p, q) + 1):
        for J in combinations(range(P.rank), p - i):
            val = component(i, J, alpha)
            if val.chart != lc:
                val = val.embed(lc)
            for D, coeff in val.comps.items():
                if len(D) != q - i:
                    raise ValueError(f"component of level {i} has form degree {len(D)}, expected {q - i}")
                sign = -1 if (len(D) * len(J)) & 1 else 1
                for e, c in coeff.coefficients_in(lam).items():
                    if sum(e) != i:
                        raise ValueError(f"level {i} component has symmetric degree {sum(e)}")
                    key = (tuple(D), tuple(J), tuple(e))
                    cc = c.restrict(P.base).scale(sign)
                    terms[key] = terms[key] + cc if key in terms else cc
    return WeilElement(P, terms)


def reconstruct_from_element(w: WeilElement) -> WeilElement:
    """Round trip through evaluations (used to test :func:`reconstruct`)."""
    p, q = w.bidegree()
    P = w.P
    return reconstruct(P, p, q, lambda i, J, a: _eval(w, [P.frame(j, a.chart) for j in J], a, i, on=a.chart))


# --- connections ---------------------------------------------------------------------

@dataclass
class Connection:
    """nabla_{d/dx_a} e_j = sum_i gamma[(i, a, j)] e_i (missing entries are zero)."""

    P: AlgebroidPresentation
    gamma: Mapping[tuple[int, int, int], Poly] = field(default_factory=dict)

    def __post_init__(self):
        for (i, a, j), v in self.gamma.items():
            if not (0 <= i < self.P.rank and 0 <= j < self.P.rank and 0 <= a < self.P.dim):
                raise ValueError(f"connection index {(i, a, j)} out of range")
            if v.chart != self.P.base:
                raise ChartError("connection coefficient on the wrong chart")

    def G(self, i, a, j) -> Poly:
        return self.gamma.get((i, a, j), Poly.zero(self.P.base))

    def correction(self, i: int) -> WeilElement:
        """sum_{a,j} Gamma^i_{aj} d^a th^j."""
        P = self.P
        z = (0,) * P.rank
        return WeilElement(P, {((a,), (j,), z): self.G(i, a, j) for a in range(P.dim) for j in range(P.rank)})

    def covariant_form(self, i: int, alpha: Section) -> PolyForm:
        """-(e^i)(nabla alpha) = -d g^i - Gamma^i_{aj} g^j dx_a."""
        on = alpha.chart
        out = -d_function(alpha.coeffs[i])
        for a in range(self.P.dim):
            for j in range(self.P.rank):
                G = self.G(i, a, j)
                if G and alpha.coeffs[j]:
                    out = out - PolyForm.basis(on, (a,), G.embed(on) * alpha.coeffs[j])
        return out


def _ring_map(w: WeilElement, images: Sequence[WeilElement], model_out: str) -> WeilElement:
    """Replace the S^1 generator i by images[i]; identity on functions, d's and th's."""
    P = w.P
    out = WeilElement.zero(P, model_out)
    z = (0,) * P.rank
    for (D, T, e), c in w.terms.items():
        term = WeilElement(P, {(D, T, z): c}, model=model_out)
        for i, k in enumerate(e):
            for _ in range(k):
                term = weil_product(term, images[i])
        out = out + term
    return out


def i_nabla(conn: Connection, source: WeilElement) -> WeilElement:
    """I_nabla: W_nabla -> W_flat, nu^i -> mu^i + Gamma^i_{aj} d^a th^j."""
    if source.model != "nabla":
        raise ValueError("source must be a W_nabla element (model='nabla')")
    if source.P is not conn.P:
        raise AlgebroidError("presentation mismatch")
    P = conn.P
    imgs = [WeilElement.mu(P, i) + conn.correction(i) for i in range(P.rank)]
    return _ring_map(source, imgs, "flat")


def i_nabla_inverse(conn: Connection, w: WeilElement) -> WeilElement:
    if w.model != "flat":
        raise ValueError("expected a flat element")
    P = conn.P
    imgs = [WeilElement.mu(P, i, "nabla") - _as_model(conn.correction(i), "nabla") for i in range(P.rank)]
    return _ring_map(w, imgs, "nabla")


def _as_model(w: WeilElement, model: str) -> WeilElement:
    return WeilElement(w.P, w.terms, model=model, _trusted=True)


def nabla_dv(conn: Connection, x: WeilElement) -> WeilElement:
    return i_nabla_inverse(conn, weil_dv(i_nabla(conn, x)))


def nabla_dh(conn: Connection, x: WeilElement) -> WeilElement:
    return i_nabla_inverse(conn, weil_dh(i_nabla(conn, x)))


def nabla_generator(P: AlgebroidPresentation, i: int) -> WeilElement:
    return WeilElement.mu(P, i, "nabla")
