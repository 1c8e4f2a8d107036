"""Equation checkers for IM forms and transgression data, each paired with the
equivalent cocycle condition in the flat Weil model.

tau and l are stored on the frame: tau[i] = tau(e_i).  On a general section
a = sum g^i e_i, tau(a) = sum g^i tau[i].
"""

from __future__ import annotations

import random
from typing import Sequence

from .algebroid import AlgebroidPresentation, Section, anchor_apply, bracket_sections
from .exactpoly import common_chart
from .intrinsic import eval_component, lam_names, reconstruct
from .polyforms import PolyForm, form_d, form_interior, form_lie, interior_bivector
from .report import CertReport
from .weilflat import WeilElement, random_poly, weil_dh, weil_dv


class PreconditionError(ValueError):
    pass


def _check_data(P: AlgebroidPresentation, data: Sequence[PolyForm], degree: int, what: str) -> list[PolyForm]:
    if len(data) != P.rank:
        raise ValueError(f"{what} needs one form per frame section ({P.rank})")
    out = []
    for w in data:
        if w.chart.coords != P.base.coords:
            raise ValueError(f"{what} entries must live on the base chart")
        if w and w.degrees() != {degree}:
            raise ValueError(f"{what} entries must have degree {degree}")
        out.append(w)
    return out


def apply_frame_map(data: Sequence[PolyForm], a: Section) -> PolyForm:
    """C^infty-linear extension: a = sum g^i e_i -> sum g^i data[i]."""
    chart = common_chart(a.chart, *[w.chart for w in data]) if data else a.chart
    out = PolyForm.zero(chart)
    for g, w in zip(a.coeffs, data):
        if g and w:
            out = out + w.embed(chart).scale(g.embed(chart))
    return out


def _rho(P, a: Section):
    return anchor_apply(P, a)


def _emb(w: PolyForm, c):
    return w if w.chart == c else w.embed(c)


def _test_sections(P: AlgebroidPresentation, rng: random.Random | None, samples: int):
    """Frame pairs, then f-scaled frame pairs."""
    base = P.base
    out = [(f"(e{i + 1}, e{j + 1})", P.frame(i), P.frame(j)) for i in range(P.rank) for j in range(P.rank)]
    if rng is not None and base.dim:
        for s in range(samples):
            i, j = rng.randrange(P.rank), rng.randrange(P.rank)
            f, g = random_poly(base, rng, 2, 2), random_poly(base, rng, 2, 2)
            out.append((f"({f}*e{i + 1}, {g}*e{j + 1})", Section.frame(base, P.rank, i, f),
                        Section.frame(base, P.rank, j, g)))
    return out


def im_residuals(P: AlgebroidPresentation, tau: Sequence[PolyForm], phi: PolyForm, a: Section, b: Section):
    """(mk-1 residual, mk-2 residual) on the pair (a, b)."""
    ra, rb = _rho(P, a), _rho(P, b)
    ta, tb = apply_frame_map(tau, a), apply_frame_map(tau, b)
    c = common_chart(ta.chart, tb.chart, phi.chart, ra.chart)
    ta, tb, ph = _emb(ta, c), _emb(tb, c), _emb(phi, c)
    ra, rb = ra.embed(c), rb.embed(c)
    r1 = form_interior(rb, ta) + form_interior(ra, tb)
    tab = _emb(apply_frame_map(tau, bracket_sections(P, a, b)), c)
    rhs = form_lie(ra, tb) - form_lie(rb, ta) + form_d(form_interior(rb, ta)) + interior_bivector(ra, rb, ph)
    return r1, tab - rhs


def check_im(P: AlgebroidPresentation, tau: Sequence[PolyForm], phi: PolyForm | None, k: int | None = None,
             seed: int = 0, samples: int = 6) -> CertReport:
    """Both IM equations on frame pairs and on random f-scaled pairs."""
    if k is None:
        k = _infer_degree(tau, phi, 1)
    phi = phi if phi is not None else PolyForm.zero(P.base)
    if not form_d(phi).is_zero():
        raise PreconditionError("phi is not closed")
    if phi and phi.degrees() != {k + 1}:
        raise ValueError(f"phi must have degree {k + 1}")
    tau = _check_data(P, tau, k - 1, "tau")
    rep = CertReport(name=f"im[{P.name}]")
    for where, a, b in _test_sections(P, random.Random(seed), samples):
        r1, r2 = im_residuals(P, tau, phi, a, b)
        rep.record("mk-1", where, r1)
        rep.record("mk-2", where, r2)
    rep.info["k"] = k
    return rep


def _infer_degree(data, phi, shift):
    for w in data:
        if w:
            return w.degree() + shift
    if phi is not None and phi:
        return phi.degree() - 1 + (shift - 1)
    raise ValueError("cannot infer the degree from all-zero data; pass k")


def cocycle_from_tau(P: AlgebroidPresentation, tau: Sequence[PolyForm], phi: PolyForm | None, k: int) -> WeilElement:
    """sigma in W^{1,k} with sigma_1 = tau and sigma_0(a) = i_{rho(a)} phi - d(sigma_1(a))."""
    phi = phi if phi is not None else PolyForm.zero(P.base)
    tau = _check_data(P, tau, k - 1, "tau")

    def comp(i, J, alpha):
        c = alpha.chart
        if i == 1:
            return apply_frame_map(tau, alpha)
        e = P.frame(J[0], c)
        return form_interior(_rho(P, e), _emb(phi, c)) - form_d(_emb(tau[J[0]], c))

    return reconstruct(P, 1, k, comp)


def xi_from_l(P: AlgebroidPresentation, l: Sequence[PolyForm], tau: Sequence[PolyForm], k: int) -> WeilElement:
    """xi in W^{1,k-1} with xi_1 = l and xi_0(a) = sigma_1(a) - d(xi_1(a)), sigma_1 = tau."""
    l = _check_data(P, l, k - 2, "l")
    tau = _check_data(P, tau, k - 1, "tau")

    def comp(i, J, alpha):
        c = alpha.chart
        if i == 1:
            return apply_frame_map(l, alpha)
        return _emb(tau[J[0]], c) - form_d(_emb(l[J[0]], c))

    return reconstruct(P, 1, k - 1, comp)


def phi_element(P: AlgebroidPresentation, phi: PolyForm) -> WeilElement:
    """A form on M as an element of W^{0, deg}."""
    if not phi:
        return WeilElement.zero(P)
    return reconstruct(P, 0, phi.degree(), lambda i, J, alpha: _emb(phi, alpha.chart))


def cocycle_residuals(P, sigma: WeilElement, phi: PolyForm) -> tuple[WeilElement, WeilElement]:
    """(d^v sigma + d^h phi, d^h sigma)."""
    return weil_dv(sigma) + weil_dh(phi_element(P, phi)), weil_dh(sigma)


def int_pr_equivalence(P: AlgebroidPresentation, tau: Sequence[PolyForm], phi: PolyForm | None, k: int,
                       seed: int = 0) -> CertReport:
    """The equation verdict and the flat-cocycle verdict must agree."""
    phi = phi if phi is not None else PolyForm.zero(P.base)
    im = check_im(P, tau, phi, k, seed=seed)
    sigma = cocycle_from_tau(P, tau, phi, k)
    r_v, r_h = cocycle_residuals(P, sigma, phi)
    cocycle_ok = r_v.is_zero() and r_h.is_zero()
    rep = CertReport(name=f"im-cocycle[{P.name}]")
    rep.require("verdicts agree", f"k={k}", im.ok == cocycle_ok,
                f"equations {'pass' if im.ok else 'fail'}, cocycle {'pass' if cocycle_ok else 'fail'}")
    rep.info.update({"equations_ok": im.ok, "cocycle_ok": cocycle_ok,
                     "equation_failures": [f.as_dict() for f in im.failures[:5]],
                     "dv_residual": str(r_v), "dh_residual": str(r_h)})
    return rep


def tau_of(sigma: WeilElement) -> list[PolyForm]:
    """Read tau[i] off the level-1 component: sigma_1(|sum lam_j e_j) = sum lam_i tau[i]."""
    P = sigma.P
    from .intrinsic import lambda_section

    alpha = lambda_section(P)
    val = eval_component(sigma, [], alpha, 1)
    lams = lam_names(P.rank)
    out = []
    for i in range(P.rank):
        part = val.map_coeffs(lambda c, i=i: c.partial(lams[i]).evaluate({n: 0 for n in lams}))
        out.append(PolyForm(P.base, {K: v.restrict(P.base) for K, v in part.comps.items()}))
    return out


def c1_determines(P: AlgebroidPresentation, sigma: WeilElement, phi: PolyForm | None = None) -> WeilElement:
    """Rebuild sigma in W^{1,k} from its level-1 component; requires d^v sigma + d^h phi = 0."""
    phi = phi if phi is not None else PolyForm.zero(P.base)
    if sigma.is_zero():
        if not weil_dh(phi_element(P, phi)).is_zero():
            raise PreconditionError("d^v sigma + d^h phi != 0")
        return sigma
    p, k = sigma.bidegree()
    if p != 1:
        raise ValueError("c1_determines needs an element of W^{1,k}")
    r_v = weil_dv(sigma) + weil_dh(phi_element(P, phi))
    if not r_v.is_zero():
        raise PreconditionError(f"d^v sigma + d^h phi = {r_v}")
    rebuilt = cocycle_from_tau(P, tau_of(sigma), phi, k)
    if rebuilt != sigma:
        raise AssertionError(f"level-1 reconstruction differs: {rebuilt - sigma}")
    return rebuilt


def transgression_residuals(P, l, tau, a: Section, b: Section, literal_sign: bool = False):
    """(mmk-1, mmk-2) residuals; c(a, b) = -i_{rho(b)} tau(a) unless ``literal_sign``."""
    ra, rb = _rho(P, a), _rho(P, b)
    la, lb = apply_frame_map(l, a), apply_frame_map(l, b)
    ta = apply_frame_map(tau, a)
    c = common_chart(la.chart, lb.chart, ta.chart, ra.chart)
    la, lb, ta = _emb(la, c), _emb(lb, c), _emb(ta, c)
    ra, rb = ra.embed(c), rb.embed(c)
    r1 = form_interior(rb, la) + form_interior(ra, lb)
    cw = form_interior(rb, ta)
    if not literal_sign:
        cw = -cw
    lab = _emb(apply_frame_map(l, bracket_sections(P, a, b)), c)
    rhs = -lab + form_lie(ra, lb) - form_lie(rb, la) + form_d(form_interior(rb, la))
    return r1, cw - rhs


def check_transgression(P: AlgebroidPresentation, l: Sequence[PolyForm], tau: Sequence[PolyForm], k: int,
                        seed: int = 0, samples: int = 6, literal_sign: bool = False) -> CertReport:
    """Transgression equations plus the xi-cocycle route; ok iff the two verdicts agree."""
    im = check_im(P, tau, None, k, seed=seed)
    if not im.ok:
        raise PreconditionError("tau is not an IM form (phi = 0)")
    l = _check_data(P, l, k - 2, "l")
    eq = CertReport(name="equations")
    for where, a, b in _test_sections(P, random.Random(seed), samples):
        r1, r2 = transgression_residuals(P, l, tau, a, b, literal_sign)
        eq.record("mmk-1", where, r1)
        eq.record("mmk-2", where, r2)
    sigma = cocycle_from_tau(P, tau, None, k)
    xi = xi_from_l(P, l, tau, k)
    r_v = weil_dv(xi) - sigma
    r_h = weil_dh(xi)
    xi_ok = r_v.is_zero() and r_h.is_zero()
    rep = CertReport(name=f"transgression[{P.name}]")
    rep.require("verdicts agree", f"k={k}", eq.ok == xi_ok,
                f"equations {'pass' if eq.ok else 'fail'}, xi-cocycle {'pass' if xi_ok else 'fail'}")
    rep.info.update({"equations_ok": eq.ok, "xi_ok": xi_ok,
                     "equation_failures": [f.as_dict() for f in eq.failures[:5]],
                     "dv_residual": str(r_v), "dh_residual": str(r_h)})
    return rep


# --- random data ------------------------------------------------------------------------------

def random_frame_forms(P: AlgebroidPresentation, degree: int, rng: random.Random, max_degree: int = 2) -> list[PolyForm]:
    from itertools import combinations

    base = P.base
    keys = list(combinations(range(base.dim), degree)) if degree >= 0 else []
    out = []
    for _ in range(P.rank):
        w = PolyForm.zero(base)
        if keys:
            for _ in range(rng.randint(0, 2)):
                w = w + PolyForm.basis(base, rng.choice(keys), random_poly(base, rng, max_degree, 2))
        out.append(w)
    return out


def exact_im_data(P: AlgebroidPresentation, eta: PolyForm) -> list[PolyForm]:
    """tau(e_i) = i_{rho(e_i)} d(eta): an IM form with phi = 0 for any eta."""
    om = form_d(eta)
    return [form_interior(anchor_apply(P, P.frame(i)), om) for i in range(P.rank)]


def exact_transgression_data(P: AlgebroidPresentation, eta: PolyForm) -> tuple[list[PolyForm], list[PolyForm]]:
    """(l, tau) with l(a) = -i_{rho(a)} eta and tau(a) = i_{rho(a)} d(eta); xi = d^h(eta) solves the xi-equations."""
    l = [-form_interior(anchor_apply(P, P.frame(i)), eta) for i in range(P.rank)]
    return l, exact_im_data(P, eta)
