import random

import pytest
from hypothesis import given, strategies as st

from conftest import seeds
from helpers import random_section, rng_of
from weilalg.algebroid import abelian, bracket_sections, library, so3, tangent
from weilalg.weilflat import (WeilElement, check_d2, random_element, weil_dh, weil_dv, weil_interior, weil_lie,
                              weil_product)

LIB = library()


def W(s, P):
    return WeilElement.parse(s, P)


def test_product_examples():
    P = so3()
    th1, th2, mu1 = W("th1", P), W("th2", P), W("mu1", P)
    assert weil_product(th1, th1).is_zero()
    assert weil_product(th1, th2) == -weil_product(th2, th1)
    assert weil_product(mu1, th2) == weil_product(th2, mu1)


def test_dv_examples():
    P = so3()
    assert weil_dv(W("th1", P)) == W("mu1", P)
    assert weil_dv(W("mu2", P)).is_zero()
    T = tangent(1)
    assert weil_dv(W("x^2", T)) == W("2*x*dx", T)


def test_dh_examples():
    g = so3()
    assert weil_dh(W("th1", g)) == W("-th2*th3", g)
    T = tangent(2)
    assert weil_dh(W("dx", T)) == W("-mu1", T)
    assert weil_dh(W("th1", abelian(2))).is_zero()


def test_interior_examples():
    P = so3()
    assert weil_interior(P.frame(0), W("th1*th2", P)) == W("th2", P)
    assert weil_interior(P.frame(0), W("mu1", P)).is_zero()
    T = tangent(1)
    xe = T.frame(0).scale(W("x", T).terms[((), (), (0,))])
    assert weil_interior(xe, W("th1", T)) == W("x", T)


def test_lie_examples():
    T = tangent(1)
    assert weil_lie(T.frame(0), W("x", T)) == W("1", T)
    A = abelian(2)
    assert weil_lie(A.frame(0), W("th2", A)).is_zero()
    P = so3()
    # -c^2_{1k} th^k with c^2_13 = -1
    assert weil_lie(P.frame(0), W("th2", P)) == W("th3", P)


@pytest.mark.parametrize("name", sorted(LIB))
def test_check_d2_library(name):
    assert check_d2(LIB[name], seed=0, samples=20).ok


def test_check_d2_negative_control():
    rep = check_d2(so3().perturbed(0, 1, 0, 1))
    assert "dh.dh" in rep.failed_identities()


@given(seeds, st.sampled_from(sorted(LIB)))
def test_derivation_law_and_bidegrees(seed, name):
    P = LIB[name]
    rng = rng_of(seed)
    w1 = random_element(P, rng, rng.randint(0, 2), rng.randint(0, 2))
    w2 = random_element(P, rng, rng.randint(0, 1), rng.randint(0, 1))
    if w1.is_zero() or w2.is_zero():
        return
    sign = -1 if w1.total_degree() % 2 else 1
    a = random_section(P, rng)
    for D in (weil_dv, weil_dh, lambda w: weil_interior(a, w)):
        lhs = D(weil_product(w1, w2))
        assert lhs == weil_product(D(w1), w2) + weil_product(w1, D(w2)).scale(sign)
    p, q = w1.bidegree()
    for D, shift in ((weil_dv, (0, 1)), (weil_dh, (1, 0))):
        img = D(w1)
        assert img.is_zero() or img.bidegrees() == {(p + shift[0], q + shift[1])}


@given(seeds, st.sampled_from(["so3xR3", "poisson_x", "heis3", "tangent2"]))
def test_cartan_relations(seed, name):
    # exact whenever the frame structure functions are constant
    P = LIB[name]
    rng = rng_of(seed)
    w = random_element(P, rng, rng.randint(0, 2), rng.randint(0, 2))
    a, b = random_section(P, rng), random_section(P, rng)
    ia = lambda v: weil_interior(a, v)
    ib = lambda v: weil_interior(b, v)
    La = lambda v: weil_lie(a, v)
    Lb = lambda v: weil_lie(b, v)
    br = bracket_sections(P, a, b)
    assert (ia(ib(w)) + ib(ia(w))).is_zero()
    assert La(ib(w)) - ib(La(w)) == weil_interior(br, w)
    assert La(Lb(w)) - Lb(La(w)) == weil_lie(br, w)


def test_cartan_defect_with_varying_structure_functions():
    # c^1_12 = 2x: [L_e1, i_e2] mu1 picks up -(d c^1_12 / dx) dx
    P = LIB["poisson_1+x^2"]
    e1, e2 = P.frame(0), P.frame(1)
    mu1 = W("mu1", P)
    lhs = weil_lie(e1, weil_interior(e2, mu1)) - weil_interior(e2, weil_lie(e1, mu1))
    assert lhs - weil_interior(bracket_sections(P, e1, e2), mu1) == W("-2*dx", P)


def test_parse_roundtrip():
    P = LIB["so3xR3"]
    w = random_element(P, random.Random(5), 2, 1)
    assert W(str(w), P) == w
