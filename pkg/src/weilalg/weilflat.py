"""The local Weil model: free bigraded graded-commutative algebra over Poly on
d^a (0,1), th^i (1,0), mu^i (1,1), with the vertical and horizontal differentials.

Monomials are keyed by ``(D, T, e)``: increasing tuples of base indices for the
d's, increasing tuples of frame indices for the th's, and an exponent vector for
the mu's.  The normal order is ``d^D th^T mu^e``.
"""

from __future__ import annotations

import random
import weakref
from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping

from .algebroid import AlgebroidError, AlgebroidPresentation, Section
from .exactpoly import Chart, ChartError, Poly, PolySyntaxError, Scalar, tokenize
from .polyforms import merge_sign
from .report import CertReport

Key = tuple  # (D, T, e)


class WeilElement:
    __slots__ = ("P", "terms", "model")

    def __init__(self, P: AlgebroidPresentation, terms: Mapping[Key, Poly] | None = None, *,
                 model: str = "flat", _trusted=False):
        self.P = P
        self.model = model
        if _trusted:
            self.terms = terms
            return
        clean = {}
        n, m = P.rank, P.dim
        for (D, T, e), c in (terms or {}).items():
            D, T, e = tuple(D), tuple(T), tuple(e)
            if len(e) != n or any(k < 0 for k in e):
                raise ValueError(f"bad mu exponent {e}")
            if any(D[i] >= D[i + 1] for i in range(len(D) - 1)) or any(a >= m or a < 0 for a in D):
                raise ValueError(f"bad d-index set {D}")
            if any(T[i] >= T[i + 1] for i in range(len(T) - 1)) or any(i >= n or i < 0 for i in T):
                raise ValueError(f"bad th-index set {T}")
            if c.chart != P.base:
                raise ChartError("Weil coefficients must live on the base chart")
            if c:
                key = (D, T, e)
                clean[key] = clean[key] + c if key in clean else c
                if not clean[key]:
                    del clean[key]
        self.terms = clean

    # constructors
    @classmethod
    def zero(cls, P, model="flat") -> "WeilElement":
        return cls(P, {}, model=model, _trusted=True)

    @classmethod
    def function(cls, P, f: Poly, model="flat") -> "WeilElement":
        if f.chart != P.base:
            raise ChartError("function not on the base chart")
        if not f:
            return cls.zero(P, model)
        return cls(P, {((), (), (0,) * P.rank): f}, model=model, _trusted=True)

    @classmethod
    def const(cls, P, c: Scalar, model="flat") -> "WeilElement":
        return cls.function(P, Poly.const(P.base, c), model)

    @classmethod
    def monomial(cls, P, D=(), T=(), e=None, coeff: Poly | Scalar = 1, model="flat") -> "WeilElement":
        """Product d^{D} th^{T} mu^{e} in the given (not necessarily sorted) order."""
        if not isinstance(coeff, Poly):
            coeff = Poly.const(P.base, coeff)
        e = tuple(e) if e is not None else (0,) * P.rank
        sign = 1
        D, T = list(D), list(T)
        for seq in (D, T):
            if len(set(seq)) != len(seq):
                return cls.zero(P, model)
            # bubble sort counting transpositions
            for i in range(len(seq)):
                for j in range(len(seq) - 1 - i):
                    if seq[j] > seq[j + 1]:
                        seq[j], seq[j + 1] = seq[j + 1], seq[j]
                        sign = -sign
        return cls(P, {(tuple(D), tuple(T), e): coeff.scale(sign)}, model=model)

    @classmethod
    def d(cls, P, a: int, model="flat") -> "WeilElement":
        return cls.monomial(P, D=(a,), model=model)

    @classmethod
    def theta(cls, P, i: int, model="flat") -> "WeilElement":
        return cls.monomial(P, T=(i,), model=model)

    @classmethod
    def mu(cls, P, i: int, model="flat") -> "WeilElement":
        e = [0] * P.rank
        e[i] = 1
        return cls.monomial(P, e=e, model=model)

    @classmethod
    def parse(cls, text: str, P: AlgebroidPresentation, model="flat") -> "WeilElement":
        return weil_parse(text, P, model)

    # structure
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    @staticmethod
    def key_bidegree(key: Key) -> tuple[int, int]:
        D, T, e = key
        k = sum(e)
        return len(T) + k, len(D) + k

    def bidegrees(self) -> set[tuple[int, int]]:
        return {self.key_bidegree(k) for k in self.terms}

    def bidegree(self) -> tuple[int, int]:
        bd = self.bidegrees()
        if len(bd) != 1:
            raise ValueError(f"element is not bihomogeneous: {sorted(bd)}")
        return next(iter(bd))

    def total_degree(self) -> int:
        degs = {p + q for p, q in self.bidegrees()}
        if len(degs) != 1:
            raise ValueError("element is not homogeneous in total degree")
        return next(iter(degs))

    def part(self, p: int, q: int) -> "WeilElement":
        return self._new({k: c for k, c in self.terms.items() if self.key_bidegree(k) == (p, q)})

    def coeff_degree(self) -> int:
        return max((c.degree() for c in self.terms.values()), default=-1)

    def _new(self, terms) -> "WeilElement":
        return WeilElement(self.P, terms, model=self.model, _trusted=True)

    def _check(self, other: "WeilElement"):
        if not isinstance(other, WeilElement):
            raise TypeError(f"expected WeilElement, got {type(other).__name__}")
        if other.P is not self.P:
            raise AlgebroidError("presentation mismatch")
        if other.model != self.model:
            raise AlgebroidError(f"model mismatch: {self.model} vs {other.model}")

    # arithmetic
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = WeilElement.const(self.P, other, self.model)
        self._check(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k)
            if s is None:
                out[k] = c
            else:
                s = s + c
                if s:
                    out[k] = s
                else:
                    del out[k]
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = WeilElement.const(self.P, other, self.model)
        return self + (-other)

    def scale(self, c) -> "WeilElement":
        if isinstance(c, Poly):
            if c.chart != self.P.base:
                raise ChartError("coefficient not on the base chart")
            out = {}
            for k, v in self.terms.items():
                w = v * c
                if w:
                    out[k] = w
            return self._new(out)
        c = Fraction(c)
        if not c:
            return self._new({})
        return self._new({k: v.scale(c) for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, WeilElement):
            return weil_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = WeilElement.const(self.P, 1, self.model)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self == WeilElement.const(self.P, other, self.model)
        if not isinstance(other, WeilElement):
            return NotImplemented
        return self.P is other.P and self.model == other.model and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.P), frozenset(self.terms.items())))

    # printing
    def sorted_items(self):
        def k(item):
            D, T, e = item[0]
            p, q = self.key_bidegree(item[0])
            return (p, q, D, T, e)

        return sorted(self.terms.items(), key=k)

    def monomial_str(self, key: Key) -> str:
        D, T, e = key
        names = self.P.base.coords
        s = "nu" if self.model == "nabla" else "mu"
        gens = [f"d{names[a]}" for a in D] + [f"th{i + 1}" for i in T]
        gens += [f"{s}{i + 1}" if k == 1 else f"{s}{i + 1}^{k}" for i, k in enumerate(e) if k]
        return "*".join(gens)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for key, c in self.sorted_items():
            mono = self.monomial_str(key)
            cs = str(c)
            if c.n_terms() > 1:
                body, neg = f"({cs})", False
                if mono:
                    body += "*" + mono
            else:
                neg = cs.startswith("-")
                cs = cs.lstrip("-")
                if not mono:
                    body = cs
                elif cs == "1":
                    body = mono
                else:
                    body = f"{cs}*{mono}"
            out.append(("-" if neg else "+", body))
        s = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, body in out[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"WeilElement({str(self)!r})"


# --- product ------------------------------------------------------------------

def _mono_mul(k1: Key, k2: Key):
    D1, T1, e1 = k1
    D2, T2, e2 = k2
    s1, D = merge_sign(D1, D2)
    if not s1:
        return 0, None
    s2, T = merge_sign(T1, T2)
    if not s2:
        return 0, None
    sign = s1 * s2
    if (len(T1) * len(D2)) & 1:
        sign = -sign
    return sign, (D, T, tuple(a + b for a, b in zip(e1, e2)))


def weil_product(w1: WeilElement, w2: WeilElement) -> WeilElement:
    w1._check(w2)
    if not w1.terms or not w2.terms:
        return w1._new({})
    out: dict = {}
    for k1, c1 in w1.terms.items():
        for k2, c2 in w2.terms.items():
            s, k = _mono_mul(k1, k2)
            if not s:
                continue
            v = c1 * c2
            if s < 0:
                v = -v
            prev = out.get(k)
            out[k] = v if prev is None else prev + v
    return w1._new({k: v for k, v in out.items() if v})


# --- derivations ----------------------------------------------------------------

class Derivation:
    """A derivation determined by its values on functions and generators.

    ``odd`` selects the sign rule D(xy) = D(x)y + (-1)^{|x|} x D(y).
    """

    def __init__(self, P: AlgebroidPresentation, odd: bool,
                 on_function: Callable[[Poly], WeilElement],
                 on_d: Callable[[int], WeilElement],
                 on_theta: Callable[[int], WeilElement],
                 on_mu: Callable[[int], WeilElement],
                 model: str = "flat"):
        self.P = P
        self.odd = odd
        self.model = model
        self.on_function = on_function
        self._gen = {"d": on_d, "th": on_theta, "mu": on_mu}
        self._gen_cache: dict = {}
        self._mono_cache: dict = {}

    def gen(self, kind: str, i: int) -> WeilElement:
        key = (kind, i)
        hit = self._gen_cache.get(key)
        if hit is None:
            hit = self._gen[kind](i)
            self._gen_cache[key] = hit
        return hit

    def monomial(self, key: Key) -> WeilElement:
        hit = self._mono_cache.get(key)
        if hit is not None:
            return hit
        D, T, e = key
        P = self.P
        zero_e = (0,) * P.rank
        if not D and not T and not any(e):
            res = WeilElement.zero(P, self.model)
        else:
            if D:
                first, rest = ("d", D[0]), (D[1:], T, e)
                first_key, odd_first = ((D[0],), (), zero_e), True
            elif T:
                first, rest = ("th", T[0]), (D, T[1:], e)
                first_key, odd_first = ((), (T[0],), zero_e), True
            else:
                i = next(j for j, k in enumerate(e) if k)
                e2 = list(e)
                e2[i] -= 1
                first, rest = ("mu", i), (D, T, tuple(e2))
                one = [0] * P.rank
                one[i] = 1
                first_key, odd_first = ((), (), tuple(one)), False
            g = WeilElement(P, {first_key: Poly.const(P.base, 1)}, model=self.model, _trusted=True)
            r = WeilElement(P, {rest: Poly.const(P.base, 1)}, model=self.model, _trusted=True)
            res = weil_product(self.gen(*first), r)
            tail = weil_product(g, self.monomial(rest))
            res = res - tail if (self.odd and odd_first) else res + tail
        self._mono_cache[key] = res
        return res

    def __call__(self, w: WeilElement) -> WeilElement:
        if w.P is not self.P:
            raise AlgebroidError("presentation mismatch")
        acc: dict = {}

        def add(elem: WeilElement, coeff: Poly | None):
            for k, c in elem.terms.items():
                v = c * coeff if coeff is not None else c
                prev = acc.get(k)
                acc[k] = v if prev is None else prev + v

        for key, c in w.terms.items():
            df = self.on_function(c)
            if df:
                unit = WeilElement(self.P, {key: Poly.const(self.P.base, 1)}, model=self.model, _trusted=True)
                add(weil_product(df, unit), None)
            dm = self.monomial(key)
            if dm:
                add(dm, c)
        return WeilElement(self.P, {k: v for k, v in acc.items() if v}, model=self.model, _trusted=True)


def _zero_gen(P, model="flat"):
    return lambda i: WeilElement.zero(P, model)


_DV_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()
_DH_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def dv_derivation(P: AlgebroidPresentation) -> Derivation:
    hit = _DV_CACHE.get(P)
    if hit is not None:
        return hit
    m = P.dim

    def on_f(f: Poly) -> WeilElement:
        terms = {}
        for a in range(m):
            df = f.partial_index(a)
            if df:
                terms[((a,), (), (0,) * P.rank)] = df
        return WeilElement(P, terms, _trusted=True)

    der = Derivation(P, True, on_f, _zero_gen(P), lambda i: WeilElement.mu(P, i), _zero_gen(P))
    _DV_CACHE[P] = der
    return der


def dh_derivation(P: AlgebroidPresentation) -> Derivation:
    hit = _DH_CACHE.get(P)
    if hit is not None:
        return hit
    m, n = P.dim, P.rank
    z = (0,) * n

    def unit_e(k):
        e = [0] * n
        e[k] = 1
        return tuple(e)

    def on_f(f: Poly) -> WeilElement:
        acc = {}
        for a in range(m):
            fa = f.partial_index(a)
            if not fa:
                continue
            for i in range(n):
                r = P.rho(i, a)
                if r:
                    k = ((), (i,), z)
                    acc[k] = acc[k] + fa * r if k in acc else fa * r
        return WeilElement(P, acc)

    def on_theta(i: int) -> WeilElement:
        acc = {}
        for (j, k), vec in P.structure.items():
            if vec[i]:
                acc[((), (j, k), z)] = -vec[i]
        return WeilElement(P, acc)

    def on_mu(i: int) -> WeilElement:
        out = WeilElement.zero(P)
        for j in range(n):
            for k in range(n):
                c = P.c(i, j, k)
                if c:
                    out = out + WeilElement(P, {((), (j,), unit_e(k)): -c})
        for (j, k), vec in P.structure.items():
            for a in range(m):
                da = vec[i].partial_index(a)
                if da:
                    # 1/2 sum_{j,k} dc θ^jθ^k ∂^a = sum_{j<k} dc ∂^a θ^jθ^k
                    out = out + WeilElement(P, {((a,), (j, k), z): da})
        return out

    def on_d(a: int) -> WeilElement:
        out = WeilElement.zero(P)
        for i in range(n):
            r = P.rho(i, a)
            if r:
                out = out + WeilElement(P, {((), (), unit_e(i)): -r})
            for b in range(m):
                db = r.partial_index(b)
                if db:
                    # θ^i ∂^b = -∂^b θ^i
                    out = out + WeilElement(P, {((b,), (i,), z): -db})
        return out

    der = Derivation(P, True, on_f, on_d, on_theta, on_mu)
    _DH_CACHE[P] = der
    return der


def weil_dv(w: WeilElement) -> WeilElement:
    return dv_derivation(w.P)(w)


def weil_dh(w: WeilElement) -> WeilElement:
    return dh_derivation(w.P)(w)


def weil_d(w: WeilElement) -> WeilElement:
    return weil_dv(w) + weil_dh(w)


def interior_derivation(a: Section, P: AlgebroidPresentation) -> Derivation:
    if a.rank != P.rank:
        raise AlgebroidError(f"rank mismatch: section {a.rank}, algebroid {P.rank}")
    if a.chart != P.base:
        raise ChartError("section must live on the base chart")
    zero = _zero_gen(P)
    return Derivation(P, True, lambda f: WeilElement.zero(P), zero,
                      lambda j: WeilElement.function(P, a.coeffs[j]), zero)


def weil_interior(a: Section, w: WeilElement) -> WeilElement:
    return interior_derivation(a, w.P)(w)


def weil_lie(a: Section, w: WeilElement) -> WeilElement:
    """L_a = d^h i_a + i_a d^h."""
    i_a = interior_derivation(a, w.P)
    return weil_dh(i_a(w)) + i_a(weil_dh(w))


# --- random elements and certification --------------------------------------------

def random_poly(c: Chart, rng: random.Random, max_degree: int = 2, max_terms: int = 3,
                denominators=(1, 1, 1, 2, 3)) -> Poly:
    if c.nvars == 0:
        return Poly.const(c, Fraction(rng.randint(-4, 4), rng.choice(denominators)))
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        deg = rng.randint(0, max_degree)
        e = [0] * c.nvars
        for _ in range(deg):
            e[rng.randrange(c.nvars)] += 1
        terms[tuple(e)] = Fraction(rng.randint(-4, 4), rng.choice(denominators))
    return Poly(c, terms)


def monomial_keys(P: AlgebroidPresentation, p: int, q: int) -> list[Key]:
    """All (D, T, e) of bidegree (p, q)."""
    m, n = P.dim, P.rank
    out = []
    for k in range(0, min(p, q) + 1):
        nd, nt = q - k, p - k
        if nd > m or nt > n:
            continue
        for e in _compositions(k, n):
            for D in combinations(range(m), nd):
                for T in combinations(range(n), nt):
                    out.append((D, T, e))
    return sorted(out, key=lambda key: (key[0], key[1], tuple(-x for x in key[2])))


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


def random_element(P: AlgebroidPresentation, rng: random.Random, p: int, q: int,
                   max_terms: int = 3, coeff_degree: int = 2) -> WeilElement:
    keys = monomial_keys(P, p, q)
    if not keys:
        return WeilElement.zero(P)
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        k = rng.choice(keys)
        terms[k] = random_poly(P.base, rng, coeff_degree)
    return WeilElement(P, terms)


def _generators(P: AlgebroidPresentation):
    for a, name in enumerate(P.base.coords):
        yield name, WeilElement.function(P, Poly.var(P.base, name))
    for a, name in enumerate(P.base.coords):
        yield f"d{name}", WeilElement.d(P, a)
    for i in range(P.rank):
        yield f"th{i + 1}", WeilElement.theta(P, i)
    for i in range(P.rank):
        yield f"mu{i + 1}", WeilElement.mu(P, i)


def check_d2(P: AlgebroidPresentation, seed: int = 0, samples: int = 20) -> CertReport:
    """d^v d^v = 0, d^h d^h = 0 and d^v d^h + d^h d^v = 0 on generators and random elements."""
    rep = CertReport(name=f"d2[{P.name}]")
    rng = random.Random(seed)
    items = list(_generators(P))
    bideg = [(p, q) for p in range(3) for q in range(3)]
    for s in range(samples):
        p, q = bideg[s % len(bideg)]
        w = random_element(P, rng, p, q)
        items.append((f"random#{s}{(p, q)}", w))
    for label, w in items:
        dv, dh = weil_dv(w), weil_dh(w)
        rep.record("dv.dv", label, weil_dv(dv))
        rep.record("dh.dh", label, weil_dh(dh))
        rep.record("dv.dh+dh.dv", label, weil_dv(dh) + weil_dh(dv))
    rep.info["seed"] = seed
    rep.info["samples"] = samples
    return rep


# --- parsing ------------------------------------------------------------------

class _WeilParser:
    def __init__(self, text: str, P: AlgebroidPresentation, model: str):
        self.text, self.P, self.model = text, P, model
        self.toks = tokenize(text)
        self.i = 0
        self.sname = "nu" if model == "nabla" else "mu"

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok):
        raise PolySyntaxError(msg, self.text, tok[2])

    def expr(self):
        t = self.peek()
        sign = 1
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

    def term(self):
        acc = self.factor()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] == "*":
                self.take()
                acc = acc * self.factor()
            else:
                return acc

    def factor(self):
        b = self.base()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            e = self.take()
            if e[0] != "int":
                self.error("expected natural exponent", e)
            b = b ** e[1]
        return b

    def base(self):
        P = self.P
        t = self.take()
        if t[0] == "int":
            val = Fraction(t[1])
            nt = self.peek()
            if nt[0] == "op" and nt[1] == "/":
                self.take()
                d = self.take()
                if d[0] != "int" or d[1] == 0:
                    self.error("expected positive integer denominator", d)
                val /= d[1]
            return WeilElement.const(P, val, self.model)
        if t[0] == "name":
            name = t[1]
            if name in P.base.coords:
                return WeilElement.function(P, Poly.var(P.base, name), self.model)
            if name.startswith("d") and name[1:] in P.base.coords:
                return WeilElement.d(P, P.base.coords.index(name[1:]), self.model)
            for prefix, ctor in (("th", WeilElement.theta), (self.sname, WeilElement.mu)):
                if name.startswith(prefix) and name[len(prefix):].isdigit():
                    i = int(name[len(prefix):]) - 1
                    if not 0 <= i < P.rank:
                        self.error(f"frame index out of range in {name!r}", t)
                    return ctor(P, i, self.model)
            self.error(f"unknown symbol {name!r}", t)
        if t[0] == "op" and t[1] == "(":
            inner = self.expr()
            c = self.take()
            if c[0] != "op" or c[1] != ")":
                self.error("expected ')'", c)
            return inner
        self.error("expected number, symbol or '('", t)


def weil_parse(text: str, P: AlgebroidPresentation, model: str = "flat") -> WeilElement:
    p = _WeilParser(text, P, model)
    if p.peek()[0] == "end":
        p.error("empty expression", p.peek())
    out = p.expr()
    if p.peek()[0] != "end":
        p.error("unexpected token", p.peek())
    return out
