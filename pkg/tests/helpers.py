"""Seeded random data shared by the test modules."""

import random
from itertools import combinations

from weilalg.algebroid import Section
from weilalg.groupoid import BSForm
from weilalg.polyforms import PolyForm
from weilalg.weilflat import random_poly


def random_section(P, rng, on=None, degree=1):
    on = on or P.base
    return Section(tuple(random_poly(P.base, rng, degree, 2).embed(on) for _ in range(P.rank)))


def random_form(c, q, rng, degree=2, terms=2):
    keys = list(combinations(range(c.dim), q))
    w = PolyForm.zero(c)
    for _ in range(terms):
        if keys:
            w = w + PolyForm.basis(c, rng.choice(keys), random_poly(c, rng, degree, 2))
    return w


def random_bs_form(G, p, q, rng, degree=2):
    return BSForm(G, p, random_form(G.nerve(p).chart, q, rng, degree))


def rng_of(seed):
    return random.Random(seed)


def oracle_instance(P, rng):
    """Random (element, sections) check of both differentials against the intrinsic formulas; None if w = 0."""
    from weilalg.intrinsic import lambda_chart, lambda_section, oracle_equality
    from weilalg.weilflat import random_element

    lc = lambda_chart(P)
    alpha = lambda_section(P, lc)
    p, q = rng.randint(0, 2), rng.randint(0, 2)
    w = random_element(P, rng, p, q)
    if w.is_zero():
        return None
    sym = alpha + random_section(P, rng, lc)
    k_dv = rng.randint(0, min(p, q + 1))
    k_dh = rng.randint(0, min(p + 1, q))
    dv_args = [random_section(P, rng, lc) for _ in range(p - k_dv)]
    dh_args = [random_section(P, rng, lc) for _ in range(p + 1 - k_dh)]
    return oracle_equality(w, dv_args, dh_args, sym, k_dv, k_dh)


def im_instance(P, rng):
    """(tau, phi, k): exact IM data (passes) or random frame data (mostly fails), k in {2, 3}."""
    from weilalg.imforms import exact_im_data, random_frame_forms
    from weilalg.polyforms import form_d

    k = rng.choice([2, 3])
    c = P.base
    phi = None
    if rng.random() < 0.3 and c.dim > k:
        phi = form_d(PolyForm.basis(c, tuple(range(k)), random_poly(c, rng, 2, 2)))
    if rng.randrange(3) == 0 and phi is None and c.dim >= k - 1:
        tau = exact_im_data(P, PolyForm.basis(c, tuple(range(k - 1)), random_poly(c, rng, 2, 2)))
    else:
        tau = random_frame_forms(P, k - 1, rng)
    return tau, phi, k


def transgression_instance(P, rng, perturb):
    """(l, tau): exact transgression data, optionally with a random function added to one l(e_i)."""
    from weilalg.imforms import exact_transgression_data

    eta = PolyForm.basis(P.base, (rng.randrange(P.base.dim),), random_poly(P.base, rng, 2, 2))
    l, tau = exact_transgression_data(P, eta)
    if perturb:
        i = rng.randrange(P.rank)
        l[i] = l[i] + PolyForm.function(random_poly(P.base, rng, 2, 2))
    return l, tau


def operator_identities(G, rng):
    """Check the R/J operator identities on one random instance; {label: holds}.
    Identities that are vacuous at the sampled level (no index in range) are left out."""
    from weilalg.algebroid import bracket_sections
    from weilalg.groupoid import J_op, R_op, degeneracy_pullback, face_pullback, lie_algebroid_of, lie_along, target_pullback
    from weilalg.polyforms import d_function

    A = lie_algebroid_of(G)
    same = lambda x, y: (x - y).is_zero()
    p, q = rng.randint(1, 3), rng.randint(0, 2)
    a, b = random_section(A, rng), random_section(A, rng)
    w = random_bs_form(G, p, q, rng)
    eta = random_bs_form(G, p, rng.randint(0, 1), rng)
    s0 = lambda v: degeneracy_pullback(v, 0)
    out = {}
    zero = BSForm(G, p - 1, PolyForm.zero(G.nerve(p - 1).chart))
    out["R = Jd + dJ"] = same(R_op(a, w), J_op(a, w.d()) + (J_op(a, w).d() if q else zero))
    out["R product rule"] = same(R_op(a, eta.wedge(w)), R_op(a, eta).wedge(s0(w)) + s0(eta).wedge(R_op(a, w)))
    sign = -1 if eta.form and eta.degree % 2 else 1
    out["J product rule"] = same(J_op(a, eta.wedge(w)),
                                   J_op(a, eta).wedge(s0(w)) + s0(eta).wedge(J_op(a, w)).scale(sign))
    f = random_poly(A.base, rng, 2, 2) + 1
    tf = target_pullback(G, p - 1, PolyForm.function(f))
    dtf = target_pullback(G, p - 1, d_function(f))
    out["R of f a"] = same(R_op(a.scale(f), w), dtf.wedge(J_op(a, w)) + tf.wedge(R_op(a, w)))
    out["J of f a"] = same(J_op(a.scale(f), w), tf.wedge(J_op(a, w)))
    if p >= 2:
        out["J and degeneracies"] = all(same(degeneracy_pullback(J_op(a, w), j),
                                               J_op(a, degeneracy_pullback(w, j + 1))) for j in range(p - 1))
        out["R and degeneracies"] = all(same(degeneracy_pullback(R_op(a, w), j),
                                               R_op(a, degeneracy_pullback(w, j + 1))) for j in range(p - 1))
    v = random_bs_form(G, p - 1, q, rng)
    out["R d_0 = 0, R d_1 = L"] = R_op(a, face_pullback(v, 0)).is_zero() and same(R_op(a, face_pullback(v, 1)),
                                                                                     lie_along(a, v))
    if p >= 2:
        out["R d_i = d_(i-1) R"] = all(same(R_op(a, face_pullback(v, i)), face_pullback(R_op(a, v), i - 1))
                                          for i in range(2, p + 1))
    br = bracket_sections(A, a, b)
    out["R_a L_b - R_b L_a = R_[a,b]"] = same(R_op(a, lie_along(b, w)) - R_op(b, lie_along(a, w)), R_op(br, w))
    return out
