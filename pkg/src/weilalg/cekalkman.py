"""Finite-dimensional Lie algebras acting on affine charts: Chevalley–Eilenberg
cochains, symmetric-power coefficients, Kalkman's algebra W(g; Omega(M)), the
Cartan model differential, and the tensor decomposition W(g) ⊗ Omega(M).

Cochains are stored on increasing frame-index tuples.  Values are forms on the
chart of M extended by ``_lam1.._lamn``; the lam-dependence encodes the
symmetric slot (a polynomial of degree k is an element of S^k(g*)).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Mapping, Sequence

from .algebroid import AlgebroidPresentation, action as action_algebroid, lie_algebra
from .exactpoly import Chart, Poly, chart_extend
from .polyforms import PolyForm, PolyVectorField, form_d, form_interior, form_lie, form_wedge, merge_sign
from .report import CertReport
from .weilflat import Key, WeilElement, monomial_keys, weil_dh, weil_dv


class ActionError(ValueError):
    pass


def _lam(n: int) -> list[str]:
    return [f"_lam{j + 1}" for j in range(n)]


class LieAlgebraAction:
    """g = span(e_1..e_n) with [e_j, e_k] = c^i_{jk} e_i acting by rho(e_i) = fields[i]."""

    def __init__(self, n: int, constants: Mapping[tuple[int, int, int], Fraction | int],
                 fields: Sequence[PolyVectorField] | None = None, chart: Chart | None = None,
                 name: str = "action"):
        self.n = n
        self.name = name
        c = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        for (i, j, k), v in constants.items():
            if j == k:
                continue
            c[i][j][k] = Fraction(v)
            c[i][k][j] = -Fraction(v)
        self.c = c
        if fields is None:
            chart = chart or Chart(())
            fields = [PolyVectorField.zero(chart) for _ in range(n)]
        if len(fields) != n:
            raise ActionError("one vector field per basis element required")
        self.fields = list(fields)
        self.M = self.fields[0].chart if fields else (chart or Chart(()))
        self.chart = chart_extend(self.M, _lam(n))
        self._check()
        self.fields_lam = [X.embed(self.chart) for X in self.fields]

    @classmethod
    def from_one_based(cls, n, consts, fields=None, chart=None, name="action"):
        return cls(n, {(i - 1, j - 1, k - 1): v for (i, j, k), v in consts.items()}, fields, chart, name)

    def _check(self):
        n = self.n
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if self.c[i][j][k] != -self.c[i][k][j]:
                        raise ActionError("structure constants not antisymmetric")
        for a, b, d in combinations(range(n), 3):
            for i in range(n):
                s = Fraction(0)
                for x, y, z in ((a, b, d), (b, d, a), (d, a, b)):
                    for m in range(n):
                        s += self.c[m][x][y] * self.c[i][m][z]
                if s:
                    raise ActionError(f"Jacobi fails at (e{a + 1},e{b + 1},e{d + 1})")
        for j, k in combinations(range(n), 2):
            lhs = self.fields[j].bracket(self.fields[k])
            rhs = PolyVectorField.zero(self.M)
            for i in range(n):
                if self.c[i][j][k]:
                    rhs = rhs + self.fields[i].scale(self.c[i][j][k])
            if not (lhs - rhs).is_zero():
                raise ActionError(
                    f"[rho(e{j + 1}), rho(e{k + 1})] != c rho(e): residual {lhs - rhs}")

    def as_algebroid(self) -> AlgebroidPresentation:
        consts = {(i + 1, j + 1, k + 1): self.c[i][j][k]
                  for i in range(self.n) for j in range(self.n) for k in range(self.n) if j < k and self.c[i][j][k]}
        if self.M.dim == 0:
            return lie_algebra(self.n, consts, name=self.name)
        return action_algebroid(consts, self.fields, name=self.name)

    def lie_algebra_only(self) -> AlgebroidPresentation:
        consts = {(i + 1, j + 1, k + 1): self.c[i][j][k]
                  for i in range(self.n) for j in range(self.n) for k in range(self.n) if j < k and self.c[i][j][k]}
        return lie_algebra(self.n, consts, name=self.name + "/g")

    def lam(self, j: int) -> Poly:
        return Poly.var(self.chart, f"_lam{j + 1}")

    def lam_vector_field(self) -> PolyVectorField:
        """rho(sum_j lam_j e_j)."""
        out = PolyVectorField.zero(self.chart)
        for j, X in enumerate(self.fields_lam):
            out = out + X.scale(self.lam(j))
        return out

    def bracket_with_lam(self, a: int) -> list[Poly]:
        """Coefficients of [e_a, sum_j lam_j e_j]."""
        out = []
        for b in range(self.n):
            acc = Poly.zero(self.chart)
            for j in range(self.n):
                if self.c[b][a][j]:
                    acc = acc + self.lam(j).scale(self.c[b][a][j])
            out.append(acc)
        return out

    def __repr__(self):
        return f"LieAlgebraAction({self.name}, n={self.n}, on {self.M})"


def so3_on_R3() -> LieAlgebraAction:
    from .algebroid import so3_rotation_fields

    return LieAlgebraAction.from_one_based(3, {(3, 1, 2): 1, (1, 2, 3): 1, (2, 3, 1): 1},
                                           so3_rotation_fields(), name="so3xR3")


def abelian_translation() -> LieAlgebraAction:
    """R acting on R by translations."""
    M = Chart(("x",))
    return LieAlgebraAction(1, {}, [PolyVectorField.coordinate(M, "x")], name="R-translations")


def abelian_trivial() -> LieAlgebraAction:
    M = Chart(("x",))
    return LieAlgebraAction(1, {}, [PolyVectorField.zero(M)], name="R-trivial")


def point_action(n: int, constants: Mapping, name: str = "g") -> LieAlgebraAction:
    return LieAlgebraAction.from_one_based(n, constants, None, Chart(()), name=name)


# --- representation on S(g*) ⊗ Omega(M) ------------------------------------------------

REPS = ("full", "trivial", "sym", "forms")


def rep_action(G: LieAlgebraAction, a: int, val: PolyForm, rep: str = "full") -> PolyForm:
    """L_{e_a} on a lam-encoded value: L_{rho(e_a)} P - partial_{[e_a, lam]} P."""
    if rep not in REPS:
        raise ValueError(f"unknown representation {rep!r}")
    out = PolyForm.zero(G.chart)
    if rep in ("full", "forms"):
        out = out + form_lie(G.fields_lam[a], val)
    if rep in ("full", "sym"):
        br = G.bracket_with_lam(a)
        for b in range(G.n):
            if br[b]:
                out = out - val.map_coeffs(lambda p, b=b: p.partial(f"_lam{b + 1}")).scale(br[b])
    return out


def sym_partial(P: PolyForm | Poly, a: Sequence[Fraction | int | Poly], n: int | None = None):
    """partial_a P for a lam-encoded polynomial P of lam-degree k >= 1."""
    is_poly = isinstance(P, Poly)
    form = PolyForm.function(P) if is_poly else P
    n = n if n is not None else len(a)
    lams = _lam(n)
    degs = {c.degree_in(lams) for c in form.comps.values()}
    if not form.comps or degs == {0}:
        raise ValueError("partial derivative of a symmetric degree-0 element (k = 0)")
    out = PolyForm.zero(form.chart)
    for b in range(n):
        coef = a[b]
        if isinstance(coef, Poly):
            if not coef:
                continue
            out = out + form.map_coeffs(lambda p, b=b: p.partial(lams[b])).scale(coef.embed(form.chart))
        elif coef:
            out = out + form.map_coeffs(lambda p, b=b: p.partial(lams[b])).scale(coef)
    return out.function_part() if is_poly else out


def polarize(P: PolyForm, vectors: Sequence[Sequence[Fraction]], n: int) -> PolyForm:
    """Symmetric multilinear value P(v_1, ..., v_k) = (1/k!) partial_{v_1} ... partial_{v_k} P."""
    out = P
    for v in vectors:
        out = sym_partial(out, v, n) if any(v) and out else PolyForm.zero(P.chart)
    k = len(vectors)
    lams = _lam(n)
    out = out.map_coeffs(lambda p: p.evaluate({nm: 0 for nm in lams}))
    return out.scale(Fraction(1, factorial(k)))


# --- cochains ----------------------------------------------------------------------------

class Cochain:
    """Antisymmetric cochain: {increasing index tuple: lam-encoded form}, all of one arity."""

    def __init__(self, G: LieAlgebraAction, arity: int, values: Mapping[tuple[int, ...], PolyForm] | None = None):
        self.G = G
        self.arity = arity
        vals = {}
        for k, v in (values or {}).items():
            k = tuple(k)
            if len(k) != arity or any(k[i] >= k[i + 1] for i in range(len(k) - 1)):
                raise ValueError(f"bad cochain key {k} for arity {arity}")
            if v.chart != G.chart:
                v = v.embed(G.chart)
            if v:
                vals[k] = v
        self.values = vals

    def __call__(self, idx: Sequence[int]) -> PolyForm:
        """Value on a (not necessarily sorted) tuple of basis indices."""
        if len(set(idx)) != len(idx):
            return PolyForm.zero(self.G.chart)
        order = sorted(range(len(idx)), key=lambda t: idx[t])
        sign = _perm_sign(order)
        v = self.values.get(tuple(sorted(idx)))
        if v is None:
            return PolyForm.zero(self.G.chart)
        return v if sign > 0 else -v

    def eval_vectors(self, vecs: Sequence[Sequence[Fraction]]) -> PolyForm:
        """Multilinear extension to arbitrary elements of g."""
        out = PolyForm.zero(self.G.chart)
        for key, v in self.values.items():
            # det of the arity x arity minor
            coeff = _det([[Fraction(vecs[r][key[s]]) for s in range(self.arity)] for r in range(self.arity)])
            if coeff:
                out = out + v.scale(coeff)
        return out

    def __add__(self, other: "Cochain"):
        assert other.arity == self.arity
        vals = dict(self.values)
        for k, v in other.values.items():
            vals[k] = vals[k] + v if k in vals else v
        return Cochain(self.G, self.arity, vals)

    def __neg__(self):
        return Cochain(self.G, self.arity, {k: -v for k, v in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.values

    def __eq__(self, other):
        return isinstance(other, Cochain) and self.arity == other.arity and self.values == other.values

    def __str__(self):
        if not self.values:
            return "0"
        return "; ".join(f"{tuple(i + 1 for i in k)}: {v}" for k, v in sorted(self.values.items()))


def _perm_sign(order: Sequence[int]) -> int:
    inv = 0
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                inv += 1
    return -1 if inv & 1 else 1


def _det(m):
    n = len(m)
    if n == 0:
        return Fraction(1)
    a = [row[:] for row in m]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return det


def ce_delta(c: Cochain, rep: str = "full") -> Cochain:
    """Koszul differential with values in S(g*) ⊗ Omega(M) (or a sub-representation)."""
    G = c.G
    n = G.n
    p = c.arity
    out = {}
    for idx in combinations(range(n), p + 1):
        acc = PolyForm.zero(G.chart)
        for s in range(p + 1):
            for t in range(s + 1, p + 1):
                rest = [idx[u] for u in range(p + 1) if u != s and u != t]
                for b in range(n):
                    cb = G.c[b][idx[s]][idx[t]]
                    if cb:
                        v = c([b] + rest).scale(cb)
                        acc = acc + (v if (s + t) % 2 == 0 else -v)
        for s in range(p + 1):
            rest = [idx[u] for u in range(p + 1) if u != s]
            v = rep_action(G, idx[s], c(rest), rep)
            acc = acc + (v if s % 2 == 0 else -v)
        if acc:
            out[idx] = acc
    return Cochain(G, p + 1, out)


# --- Kalkman's algebra -------------------------------------------------------------------

class KalkmanElement:
    """Element of Lambda(g*; S(g*, Omega(M))): {increasing tuple: lam-encoded form}.

    Arities may be mixed; the Lambda-degree of a value is the length of its key.
    """

    def __init__(self, G: LieAlgebraAction, values: Mapping[tuple[int, ...], PolyForm] | None = None):
        self.G = G
        vals = {}
        for k, v in (values or {}).items():
            k = tuple(k)
            if any(k[i] >= k[i + 1] for i in range(len(k) - 1)):
                raise ValueError(f"bad key {k}")
            if v.chart != G.chart:
                v = v.embed(G.chart)
            if v:
                vals[k] = vals[k] + v if k in vals else v
                if not vals[k]:
                    del vals[k]
        self.values = vals

    @classmethod
    def from_cochain(cls, c: Cochain) -> "KalkmanElement":
        return cls(c.G, c.values)

    def arity_part(self, a: int) -> Cochain:
        return Cochain(self.G, a, {k: v for k, v in self.values.items() if len(k) == a})

    def arities(self) -> list[int]:
        return sorted({len(k) for k in self.values})

    def __add__(self, other: "KalkmanElement"):
        vals = dict(self.values)
        for k, v in other.values.items():
            vals[k] = vals[k] + v if k in vals else v
        return KalkmanElement(self.G, vals)

    def __neg__(self):
        return KalkmanElement(self.G, {k: -v for k, v in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "KalkmanElement":
        return KalkmanElement(self.G, {k: v.scale(c) for k, v in self.values.items()})

    def __mul__(self, other: "KalkmanElement") -> "KalkmanElement":
        return kalkman_product(self, other)

    def is_zero(self) -> bool:
        return not self.values

    def __eq__(self, other):
        return isinstance(other, KalkmanElement) and self.G is other.G and self.values == other.values

    def bidegrees(self) -> set[tuple[int, int]]:
        lams = _lam(self.G.n)
        out = set()
        for key, v in self.values.items():
            for I, c in v.comps.items():
                for e in c.coefficients_in(lams):
                    k = sum(e)
                    out.add((len(key) + k, len(I) + k))
        return out

    def total_parity_parts(self):
        """Split into (even, odd) total degree parts."""
        lams = _lam(self.G.n)
        even, odd = {}, {}
        for key, v in self.values.items():
            for I, c in v.comps.items():
                for e, cc in c.coefficients_in(lams).items():
                    k = sum(e)
                    deg = len(key) + len(I) + 2 * k
                    target = even if deg % 2 == 0 else odd
                    piece = PolyForm(v.chart, {I: cc * _lam_monomial(self.G, e)})
                    target[key] = target[key] + piece if key in target else piece
        return KalkmanElement(self.G, even), KalkmanElement(self.G, odd)

    def __str__(self):
        if not self.values:
            return "0"
        return "; ".join(f"{tuple(i + 1 for i in k)}: {v}" for k, v in sorted(self.values.items()))


def _lam_monomial(G: LieAlgebraAction, e) -> Poly:
    out = Poly.const(G.chart, 1)
    for j, k in enumerate(e):
        if k:
            out = out * G.lam(j) ** k
    return out


def kalkman_product(c1: KalkmanElement, c2: KalkmanElement) -> KalkmanElement:
    """(cc')(a_1..|a) = (-1)^{q p'} sum over shuffles sgn c(..|a) c'(..|a)."""
    G = c1.G
    out: dict = {}
    for k1, v1 in c1.values.items():
        for k2, v2 in c2.values.items():
            s, key = merge_sign(k1, k2)
            if not s:
                continue
            pp = len(k2)
            # (-1)^{q p'} needs the form degree q of v1; split v1 by degree
            for q in v1.degrees():
                part = v1.part(q)
                val = form_wedge(part, v2)
                if not val:
                    continue
                sign = s * (-1 if (q * pp) & 1 else 1)
                val = val if sign > 0 else -val
                out[key] = out[key] + val if key in out else val
    return KalkmanElement(G, out)


def kalkman_delta(c: KalkmanElement, rep: str = "full") -> KalkmanElement:
    out = KalkmanElement(c.G)
    for a in c.arities():
        out = out + KalkmanElement.from_cochain(ce_delta(c.arity_part(a), rep))
    return out


def kalkman_iA(c: KalkmanElement) -> KalkmanElement:
    """i_A(c)(a_1..a_p|a) = (-1)^{p+1} i_{rho(a)} c(a_1..a_p|a)."""
    X = c.G.lam_vector_field()
    out = {}
    for key, v in c.values.items():
        w = form_interior(X, v)
        out[key] = w if len(key) % 2 == 1 else -w
    return KalkmanElement(c.G, out)


def kalkman_dA(c: KalkmanElement) -> KalkmanElement:
    """d_A(c)(a_1..a_p|a) = (-1)^p d(c(a_1..a_p|a))."""
    out = {}
    for key, v in c.values.items():
        w = form_d(v)
        out[key] = w if len(key) % 2 == 0 else -w
    return KalkmanElement(c.G, out)


def kalkman_ig(c: KalkmanElement) -> KalkmanElement:
    """i_g(c)(a_1..a_{p-1}|a) = (-1)^{p+1} c(a_1..a_{p-1}, a|a)."""
    G = c.G
    out: dict = {}
    for key, v in c.values.items():
        p = len(key)
        if p == 0:
            continue
        for pos, j in enumerate(key):
            rest = key[:pos] + key[pos + 1:]
            # move e_j to the last slot: sign (-1)^{p-1-pos}
            sgn = -1 if (p - 1 - pos) & 1 else 1
            if (p + 1) & 1:
                sgn = -sgn
            w = v.scale(G.lam(j))
            w = w if sgn > 0 else -w
            out[rest] = out[rest] + w if rest in out else w
    return KalkmanElement(G, out)


def kalkman_dh(c: KalkmanElement) -> KalkmanElement:
    return kalkman_delta(c) + kalkman_iA(c)


def kalkman_dv(c: KalkmanElement) -> KalkmanElement:
    return kalkman_dA(c) + kalkman_ig(c)


def cartan_differential(P: PolyForm, G: LieAlgebraAction) -> PolyForm:
    """d_G(P)(v) = d(P(v)) + i_{rho(v)} P(v), with v = sum lam_j e_j."""
    if P.chart != G.chart:
        P = P.embed(G.chart)
    return form_d(P) + form_interior(G.lam_vector_field(), P)


def is_invariant(P: PolyForm, G: LieAlgebraAction) -> bool:
    """L_{e_a} P = 0 for every basis element (the lam-encoded representation)."""
    if P.chart != G.chart:
        P = P.embed(G.chart)
    return all(rep_action(G, a, P).is_zero() for a in range(G.n))


def is_basic_form(w: PolyForm, G: LieAlgebraAction) -> bool:
    """i_{rho(e_a)} w = 0 and L_{rho(e_a)} w = 0 for all a."""
    if w.chart != G.M:
        raise ValueError(f"form must live on {G.M}")
    return all(form_interior(X, w).is_zero() and form_lie(X, w).is_zero() for X in G.fields)


# --- W(g) ⊗ Omega(M) and the decomposition --------------------------------------------------

class TensorElement:
    """Finite sum of w ⊗ a with w a W(g) monomial (over a point) and a a form on M."""

    def __init__(self, G: LieAlgebraAction, Wg: AlgebroidPresentation, items: Mapping[Key, PolyForm] | None = None):
        self.G, self.Wg = G, Wg
        vals = {}
        for k, v in (items or {}).items():
            if v.chart != G.M:
                raise ValueError("form must live on M")
            if v:
                vals[k] = vals[k] + v if k in vals else v
                if not vals[k]:
                    del vals[k]
        self.items = vals

    @classmethod
    def simple(cls, G, Wg, w: WeilElement, a: PolyForm) -> "TensorElement":
        items = {}
        for k, c in w.terms.items():
            items[k] = a.scale(c.constant_term())
        return cls(G, Wg, items)

    def __add__(self, other):
        items = dict(self.items)
        for k, v in other.items.items():
            items[k] = items[k] + v if k in items else v
        return TensorElement(self.G, self.Wg, items)

    def __neg__(self):
        return TensorElement(self.G, self.Wg, {k: -v for k, v in self.items.items()})

    def __sub__(self, other):
        return self + (-other)


def _w_degree(key: Key) -> int:
    D, T, e = key
    return len(D) + len(T) + 2 * sum(e)


def _apply_w(op, key: Key, Wg) -> WeilElement:
    return op(WeilElement(Wg, {key: Poly.const(Wg.base, 1)}))


def tensor_map(op_w, op_a, t: TensorElement, a_degree_odd: bool) -> TensorElement:
    """(op_w ⊗ op_a)(w ⊗ a) = (-1)^{|op_a| |w|} op_w(w) ⊗ op_a(a)."""
    out = TensorElement(t.G, t.Wg)
    for key, form in t.items.items():
        ws = op_w(WeilElement(t.Wg, {key: Poly.const(t.Wg.base, 1)}))
        fa = op_a(form)
        if not fa or not ws:
            continue
        sign = -1 if (a_degree_odd and _w_degree(key) & 1) else 1
        out = out + TensorElement.simple(t.G, t.Wg, ws, fa.scale(sign))
    return out


def weil_to_kalkman(G: LieAlgebraAction, w: WeilElement) -> KalkmanElement:
    """W(g) -> Lambda(g*; S(g*)): th^T -> dual basis cochain, mu^e -> lam^e."""
    out = KalkmanElement(G)
    for (D, T, e), c in w.terms.items():
        if D:
            raise ValueError("W(g) over a point has no d-generators")
        val = PolyForm.function(_lam_monomial(G, e).scale(c.constant_term()))
        out = out + KalkmanElement(G, {T: val})
    return out


def tensor_to_kalkman(t: TensorElement) -> KalkmanElement:
    """Phi(w ⊗ a) = Phi(w) * (1 ⊗ a) in the Kalkman product."""
    G = t.G
    out = KalkmanElement(G)
    for key, form in t.items.items():
        wk = weil_to_kalkman(G, WeilElement(t.Wg, {key: Poly.const(t.Wg.base, 1)}))
        ak = KalkmanElement(G, {(): form.embed(G.chart)})
        out = out + kalkman_product(wk, ak)
    return out


def tensor_spanning_set(G: LieAlgebraAction, Wg: AlgebroidPresentation, max_p: int = 2, max_q: int = 2,
                        coeff_degree: int = 1) -> list[tuple[str, TensorElement]]:
    """w ⊗ (x^m dx_I) over W(g) monomials and basis forms, total bidegree <= (max_p, max_q)."""
    M = G.M
    out = []
    mons = [()]
    for deg in range(1, coeff_degree + 1):
        mons += [tuple(c) for c in combinations_with_replacement_idx(M.dim, deg)]
    for pw in range(max_p + 1):
        for qw in range(max_q + 1):
            for key in monomial_keys(Wg, pw, qw):
                for r in range(0, max_q - qw + 1):
                    for I in combinations(range(M.dim), r):
                        for mon in mons:
                            e = [0] * M.dim
                            for a in mon:
                                e[a] += 1
                            coeff = Poly(M, {tuple(e): 1})
                            form = PolyForm(M, {I: coeff})
                            w = WeilElement(Wg, {key: Poly.const(Wg.base, 1)})
                            label = f"{w} ⊗ {form}"
                            out.append((label, TensorElement.simple(G, Wg, w, form)))
    return out


def combinations_with_replacement_idx(n: int, k: int):
    from itertools import combinations_with_replacement

    return combinations_with_replacement(range(n), k)


def decomposition_check(G: LieAlgebraAction, max_p: int = 2, max_q: int = 2, coeff_degree: int = 1) -> CertReport:
    """delta = d^h_W⊗1 + th^a⊗L_{e_a}, i_A = -mu^a⊗i_{e_a}, d_A = 1⊗d, i_g = d^v_W⊗1 under Phi."""
    rep = CertReport(name=f"decomposition[{G.name}]")
    Wg = G.lie_algebra_only()
    ident = lambda x: x
    th = [WeilElement.theta(Wg, a) for a in range(G.n)]
    mu = [WeilElement.mu(Wg, a) for a in range(G.n)]
    for label, t in tensor_spanning_set(G, Wg, max_p, max_q, coeff_degree):
        phi = tensor_to_kalkman(t)
        # delta
        rhs = tensor_map(weil_dh, ident, t, False)
        for a in range(G.n):
            rhs = rhs + tensor_map(lambda w, a=a: th[a] * w, lambda f, a=a: form_lie(G.fields[a], f), t, False)
        rep.record("delta", label, kalkman_delta(phi) - tensor_to_kalkman(rhs))
        # i_A
        rhs = TensorElement(G, Wg)
        for a in range(G.n):
            rhs = rhs - tensor_map(lambda w, a=a: mu[a] * w, lambda f, a=a: form_interior(G.fields[a], f), t, True)
        rep.record("i_A", label, kalkman_iA(phi) - tensor_to_kalkman(rhs))
        # d_A
        rhs = tensor_map(ident, form_d, t, True)
        rep.record("d_A", label, kalkman_dA(phi) - tensor_to_kalkman(rhs))
        # i_g
        rhs = tensor_map(weil_dv, ident, t, False)
        rep.record("i_g", label, kalkman_ig(phi) - tensor_to_kalkman(rhs))
    rep.info["max_bidegree"] = [max_p, max_q]
    return rep


def random_kalkman(G: LieAlgebraAction, rng, max_arity: int = 2, max_lam: int = 2, max_form: int = 2,
                   n_terms: int = 3) -> KalkmanElement:
    from .weilflat import random_poly

    out = KalkmanElement(G)
    M = G.M
    lams = _lam(G.n)
    for _ in range(n_terms):
        a = rng.randint(0, min(max_arity, G.n))
        key = tuple(sorted(rng.sample(range(G.n), a)))
        r = rng.randint(0, min(max_form, M.dim))
        I = tuple(sorted(rng.sample(range(M.dim), r)))
        coeff = random_poly(M, rng, 2, 2).embed(G.chart) if M.dim else Poly.const(G.chart, rng.randint(-3, 3))
        k = rng.randint(0, max_lam)
        mon = Poly.const(G.chart, 1)
        for _ in range(k):
            mon = mon * Poly.var(G.chart, rng.choice(lams))
        out = out + KalkmanElement(G, {key: PolyForm(G.chart, {I: coeff * mon})})
    return out
