"""Exact cohomology of finite slices: Weil complexes (total or one row),
Chevalley–Eilenberg complexes with S^q(g*) coefficients, and rows of the
normalized Bott–Shulman complex of a groupoid with linear structure maps.

Ranks are computed by fraction-free sparse elimination over the integers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Callable, Sequence

from .algebroid import AlgebroidPresentation
from .exactpoly import Chart, Poly
from .polyforms import PolyForm
from .weilflat import Key, WeilElement, monomial_keys, weil_d, weil_dh, weil_dv


class TruncationError(ValueError):
    """The differential leaves the chosen finite slice."""

    def __init__(self, message: str, witness: str = ""):
        super().__init__(message + (f": {witness}" if witness else ""))
        self.witness = witness


Vector = dict  # {row index: Fraction}


# --- exact linear algebra ----------------------------------------------------------------

def _integerize(v: Vector) -> dict[int, int]:
    den = 1
    for c in v.values():
        den = lcm(den, Fraction(c).denominator)
    out = {k: int(Fraction(c) * den) for k, c in v.items() if c}
    return _primitive(out)


def _primitive(v: dict[int, int]) -> dict[int, int]:
    g = 0
    for c in v.values():
        g = gcd(g, c)
        if g == 1:
            break
    if g > 1:
        v = {k: c // g for k, c in v.items()}
    return v


def exact_rank(columns: Sequence[Vector]) -> int:
    """Rank of the span of sparse vectors (fraction-free elimination, content removed)."""
    pivots: dict[int, dict[int, int]] = {}
    for col in columns:
        v = _integerize(col)
        while v:
            lead = min(v)
            piv = pivots.get(lead)
            if piv is None:
                pivots[lead] = v
                break
            a, b = piv[lead], v[lead]
            out = {}
            for k in set(v) | set(piv):
                c = a * v.get(k, 0) - b * piv.get(k, 0)
                if c:
                    out[k] = c
            v = _primitive(out) if out else out
    return len(pivots)


def nullspace(columns: Sequence[Vector], ncols: int | None = None) -> list[Vector]:
    """Basis of {x : sum_j x_j columns[j] = 0} as sparse vectors over Q."""
    n = len(columns) if ncols is None else ncols
    rows: dict[int, dict[int, Fraction]] = {}
    for j, col in enumerate(columns):
        for i, c in col.items():
            if c:
                rows.setdefault(i, {})[j] = Fraction(c)
    R = [r for _, r in sorted(rows.items())]
    pivot_cols: list[int] = []
    pivot_rows: list[dict[int, Fraction]] = []
    for r in R:
        r = dict(r)
        for pc, pr in zip(pivot_cols, pivot_rows):
            c = r.get(pc)
            if c:
                for k, v in pr.items():
                    nv = r.get(k, 0) - c * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
        if not r:
            continue
        lead = min(r)
        inv = 1 / r[lead]
        r = {k: v * inv for k, v in r.items()}
        # back-substitute into earlier pivot rows
        for idx, pr in enumerate(pivot_rows):
            c = pr.get(lead)
            if c:
                for k, v in r.items():
                    nv = pr.get(k, 0) - c * v
                    if nv:
                        pr[k] = nv
                    else:
                        pr.pop(k, None)
        pivot_cols.append(lead)
        pivot_rows.append(r)
    pset = set(pivot_cols)
    basis = []
    for f in range(n):
        if f in pset:
            continue
        v = {f: Fraction(1)}
        for pc, pr in zip(pivot_cols, pivot_rows):
            c = pr.get(f)
            if c:
                v[pc] = -c
        basis.append(v)
    return basis


def mat_apply(columns: Sequence[Vector], x: Vector) -> Vector:
    out: dict = {}
    for j, c in x.items():
        for i, v in columns[j].items():
            out[i] = out.get(i, 0) + c * v
    return {i: v for i, v in out.items() if v}


def compose(A: Sequence[Vector], B: Sequence[Vector]) -> list[Vector]:
    """Columns of A·B."""
    return [mat_apply(A, b) for b in B]


# --- Weil slices -----------------------------------------------------------------------------

def _coeff_monomials(c: Chart, max_degree: int) -> list[tuple[int, ...]]:
    out = []
    m = c.dim
    for deg in range(max_degree + 1):
        for combo in _compositions(deg, m):
            out.append(combo)
    return out


def _compositions(k: int, n: int):
    if n == 0:
        if k == 0:
            yield ()
        return
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(k - first, n - 1):
            yield (first,) + rest


def _key_weight(key: Key) -> int:
    D, T, e = key
    return len(D) + len(T) + sum(e)


@dataclass
class BasisSlice:
    P: AlgebroidPresentation
    bidegree: tuple[int, int]
    bound: int
    mode: str
    elements: list[tuple[tuple[int, ...], Key]]
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {b: i for i, b in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def element(self, i: int) -> WeilElement:
        mono, key = self.elements[i]
        return WeilElement(self.P, {key: Poly(self.P.base, {mono: 1})})

    def labels(self) -> list[str]:
        return [str(self.element(i)) for i in range(len(self))]

    def coordinates(self, w: WeilElement) -> Vector:
        out = {}
        for key, c in w.terms.items():
            for mono, v in c.terms.items():
                idx = self.index.get((mono, key))
                if idx is None:
                    raise TruncationError(f"image leaves the slice W^{self.bidegree} ({self.mode} <= {self.bound})",
                                          str(WeilElement(self.P, {key: Poly(self.P.base, {mono: v})})))
                out[idx] = v
        return out


def enumerate_basis(P: AlgebroidPresentation, bidegree: tuple[int, int], D: int = 0, mode: str = "coeff",
                    order_seed: int | None = None) -> BasisSlice:
    """Monomial basis of W^{p,q}: coefficient degree <= D ("coeff"), or
    coefficient degree + |D| + |T| + |e| <= D ("weight")."""
    if mode not in ("coeff", "weight"):
        raise ValueError(f"unknown truncation mode {mode!r}")
    p, q = bidegree
    els = []
    if p >= 0 and q >= 0:
        keys = monomial_keys(P, p, q)
        monos = _coeff_monomials(P.base, D if P.dim else 0)
        for key in keys:
            for mono in monos:
                if P.dim == 0 or (sum(mono) <= D if mode == "coeff" else sum(mono) + _key_weight(key) <= D):
                    els.append((mono, key))
    if order_seed is not None:
        random.Random(order_seed).shuffle(els)
    return BasisSlice(P, (p, q), D, mode, els)


OPERATORS: dict[str, Callable[[WeilElement], WeilElement]] = {"dv": weil_dv, "dh": weil_dh, "d": weil_d}


def assemble_matrix(op: str | Callable, domain: BasisSlice, codomain: BasisSlice) -> list[Vector]:
    fn = OPERATORS[op] if isinstance(op, str) else op
    return [codomain.coordinates(fn(domain.element(i))) for i in range(len(domain))]


@dataclass
class RankResult:
    degrees: list[int]
    dims: list[int]
    ranks: list[int]
    betti: list[int]
    info: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"degrees": self.degrees, "dims": self.dims, "ranks": self.ranks, "betti": self.betti, **self.info}


def _total_slices(P, n, D, mode, order_seed):
    return [enumerate_basis(P, (p, n - p), D, mode, order_seed) for p in range(n + 1)]


class _Stacked:
    """Direct sum of slices for the total complex."""

    def __init__(self, slices: list[BasisSlice]):
        self.slices = slices
        self.offsets = []
        off = 0
        for s in slices:
            self.offsets.append(off)
            off += len(s)
        self.size = off
        self.by_bideg = {s.bidegree: (s, o) for s, o in zip(slices, self.offsets)}

    def element(self, i):
        for s, o in zip(self.slices, self.offsets):
            if i < o + len(s):
                return s.element(i - o)
        raise IndexError(i)

    def coordinates(self, w: WeilElement) -> Vector:
        out = {}
        for bd in w.bidegrees():
            hit = self.by_bideg.get(bd)
            if hit is None:
                raise TruncationError(f"image has bidegree {bd} outside the total slice", str(w.part(*bd)))
            s, o = hit
            for i, v in s.coordinates(w.part(*bd)).items():
                out[o + i] = v
        return out


def betti(P: AlgebroidPresentation, mode: str = "total", degrees: Sequence[int] = range(0, 5), q: int = 0,
          D: int = 0, truncation: str = "coeff", order_seed: int | None = None) -> RankResult:
    """Exact Betti numbers of Tot W (d = d^v + d^h) or of the row (W^{.,q}, d^h)."""
    degrees = list(degrees)
    if not degrees:
        raise ValueError("empty degree range")
    lo, hi = min(degrees), max(degrees)
    span = list(range(lo - 1, hi + 2))
    spaces = {}
    for n in span:
        if n < 0:
            spaces[n] = None
        elif mode == "total":
            spaces[n] = _Stacked(_total_slices(P, n, D, truncation, order_seed))
        elif mode == "row":
            spaces[n] = enumerate_basis(P, (n, q), D, truncation, order_seed)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    op = weil_d if mode == "total" else weil_dh
    ranks = {}
    for n in span[:-1]:
        src, dst = spaces[n], spaces[n + 1]
        if src is None:
            ranks[n] = 0
            continue
        size = src.size if isinstance(src, _Stacked) else len(src)
        cols = [dst.coordinates(op(src.element(i))) for i in range(size)]
        ranks[n] = exact_rank(cols)
    dims = [(spaces[n].size if isinstance(spaces[n], _Stacked) else len(spaces[n])) for n in degrees]
    out_ranks = [ranks[n] for n in degrees]
    b = [dims[i] - out_ranks[i] - ranks[degrees[i] - 1] for i in range(len(degrees))]
    info = {"mode": mode, "algebroid": P.name, "poly_degree": D, "truncation": truncation}
    if mode == "row":
        info["q"] = q
    return RankResult(degrees, dims, out_ranks, b, info)


# --- Chevalley–Eilenberg with S^q(g*) coefficients --------------------------------------------------

def ce_sym_betti(constants: dict, n: int, q: int, degrees: Sequence[int] = range(0, 4)) -> RankResult:
    """H^p(g; S^q g*) from the Koszul differential (independent of the Weil model)."""
    from .cekalkman import Cochain, ce_delta, point_action

    G = point_action(n, constants)
    lams = [G.lam(j) for j in range(n)]
    sym_monos = []
    for e in _compositions(q, n):
        mono = Poly.const(G.chart, 1)
        for j, k in enumerate(e):
            if k:
                mono = mono * lams[j] ** k
        sym_monos.append((e, mono))

    def basis(p):
        if p < 0 or p > n:
            return []
        return [(J, e, mono) for J in combinations(range(n), p) for e, mono in sym_monos]

    def coords(c: Cochain, index) -> Vector:
        out = {}
        lamn = [f"_lam{j + 1}" for j in range(n)]
        for J, val in c.values.items():
            for e, coeff in val.function_part().coefficients_in(lamn).items():
                out[index[(J, e)]] = coeff.constant_term()
        return out

    degrees = list(degrees)
    ranks = {}
    for p in range(min(degrees) - 1, max(degrees) + 1):
        src, dst = basis(p), basis(p + 1)
        index = {(J, e): i for i, (J, e, _) in enumerate(dst)}
        cols = []
        for J, e, mono in src:
            c = Cochain(G, p, {J: PolyForm.function(mono)})
            cols.append(coords(ce_delta(c, "sym"), index))
        ranks[p] = exact_rank(cols) if src else 0
    dims = [len(basis(p)) for p in degrees]
    out_ranks = [ranks[p] for p in degrees]
    b = [dims[i] - out_ranks[i] - ranks[degrees[i] - 1] for i in range(len(degrees))]
    return RankResult(degrees, dims, out_ranks, b, {"mode": "ce-sym", "q": q})


def lie_constants(P: AlgebroidPresentation) -> dict:
    """{(i, j, k) 1-based: c^i_{jk}} for j < k, from a presentation over a point."""
    if P.dim:
        raise ValueError("not a Lie algebra (base has positive dimension)")
    out = {}
    for (j, k), vec in P.structure.items():
        for i, c in enumerate(vec):
            if c:
                out[(i + 1, j + 1, k + 1)] = c.constant_term()
    return out


# --- Bott–Shulman rows -------------------------------------------------------------------------

def _form_basis(c: Chart, q: int, D: int):
    return [(I, mono) for I in combinations(range(c.dim), q) for mono in _coeff_monomials(c, D)]


def bott_shulman_row_cohomology(G, q: int, pmax: int, D: int) -> RankResult:
    """Betti numbers of the normalized row (Omega^q(G_p), delta) with coefficient degree <= D."""
    from .groupoid import BSForm, bs_delta, degeneracy_pullback

    if not G.is_linear:
        raise TruncationError("structure maps are not linear; delta does not preserve polynomial degree")
    levels = list(range(0, pmax + 2))
    bases = {p: _form_basis(G.nerve(p).chart, q, D) for p in levels}
    index = {p: {b: i for i, b in enumerate(bases[p])} for p in levels}

    def elem(p, b):
        I, mono = b
        c = G.nerve(p).chart
        return BSForm(G, p, PolyForm(c, {I: Poly(c, {mono: 1})}))

    def coords(p, w: BSForm) -> Vector:
        out = {}
        for I, coeff in w.form.comps.items():
            for mono, v in coeff.terms.items():
                idx = index[p].get((I, mono))
                if idx is None:
                    raise TruncationError("delta leaves the truncation", str(w))
                out[idx] = v
        return out

    normalized = {}
    for p in levels:
        if p == 0:
            normalized[p] = [{i: Fraction(1)} for i in range(len(bases[p]))]
            continue
        # stack all s_i^* into one block matrix
        cols = []
        sub_index = {b: i for i, b in enumerate(bases[p - 1])}
        block = len(bases[p - 1])
        for b in bases[p]:
            w = elem(p, b)
            col = {}
            for i in range(p):
                s = degeneracy_pullback(w, i)
                for I, coeff in s.form.comps.items():
                    for mono, v in coeff.terms.items():
                        col[i * block + sub_index[(I, mono)]] = v
            cols.append(col)
        normalized[p] = nullspace(cols, len(bases[p]))
    delta = {p: [coords(p + 1, bs_delta(elem(p, b))) for b in bases[p]] for p in levels[:-1]}
    ranks = {-1: 0}
    for p in levels[:-1]:
        ranks[p] = exact_rank(compose(delta[p], normalized[p]))
    degs = list(range(0, pmax + 1))
    dims = [len(normalized[p]) for p in degs]
    b = [dims[i] - ranks[degs[i]] - ranks[degs[i] - 1] for i in range(len(degs))]
    return RankResult(degs, dims, [ranks[p] for p in degs], b,
                      {"mode": "bott-shulman", "groupoid": G.name, "q": q, "poly_degree": D})
