import pytest
from hypothesis import given, strategies as st

from conftest import seeds
from helpers import oracle_instance, random_section, rng_of
from weilalg.algebroid import Section, abelian, library, so3, tangent
from weilalg.exactpoly import Poly
from weilalg.intrinsic import (Connection, LevelError, body_determinacy, eval_component, i_nabla, i_nabla_inverse,
                               intrinsic_dh_component, intrinsic_dv_component, lambda_section, leibniz_check, nabla_dh,
                               nabla_dv, reconstruct_from_element)
from weilalg.polyforms import PolyForm, d_function
from weilalg.weilflat import WeilElement, random_element, weil_product

LIB = library()


def W(s, P, model="flat"):
    return WeilElement.parse(s, P, model)


def test_generator_evaluations():
    T = tangent(2)
    assert eval_component(W("dy", T), [], None, 0) == PolyForm.parse("dy", T.base)
    g = Section.from_strings(T.base, ["x*y", "x^2"])
    assert eval_component(W("mu2", T), [], g, 1) == PolyForm.parse("x^2", T.base)
    assert eval_component(W("mu2", T), [g], None, 0) == -d_function(g.coeffs[1])
    assert eval_component(W("th1", T), [g], None, 0) == PolyForm.parse("x*y", T.base)


def test_level_out_of_range():
    T = tangent(1)
    with pytest.raises(LevelError):
        eval_component(W("th1", T), [], None, 1)


def test_intrinsic_component_examples():
    T = tangent(1)
    alpha = lambda_section(T)
    # theta: (d^v th)_1(|a) = g
    lhs = intrinsic_dv_component(W("th1", T), [], alpha, 1)
    assert lhs == eval_component(W("mu1", T), [], alpha, 1)
    f = W("x^3", T)
    assert intrinsic_dv_component(f, [], None, 0) == PolyForm.parse("3*x^2 dx", T.base)
    g = Section.from_strings(T.base, ["x"])
    assert intrinsic_dh_component(f, [g], None, 0) == PolyForm.parse("3*x^3", T.base)
    A = abelian(2)
    assert intrinsic_dh_component(W("th1", A), [A.frame(0), A.frame(1)], None, 0).is_zero()
    P = so3()
    assert intrinsic_dh_component(W("th1", P), [P.frame(1), P.frame(2)], None, 0) == PolyForm.const(P.base, -1)
    assert eval_component(W("-th2*th3", P), [P.frame(1), P.frame(2)], None, 0) == PolyForm.const(P.base, -1)


@given(seeds, st.sampled_from(sorted(LIB)))
def test_oracle_equality(seed, name):
    rep = oracle_instance(LIB[name], rng_of(seed))
    assert rep is None or rep.ok, str(rep)


def test_leibniz_examples():
    T = tangent(1)
    x = Poly.var(T.base, "x")
    assert leibniz_check(W("mu1", T), [T.frame(0)], x).ok
    assert leibniz_check(W("th1", T), [T.frame(0)], x * x).ok
    assert leibniz_check(W("mu1", T), [T.frame(0)], Poly.const(T.base, 1)).ok


@given(seeds, st.sampled_from(["tangent2", "so3xR3", "poisson_1+x^2"]))
def test_leibniz_random(seed, name):
    P = LIB[name]
    rng = rng_of(seed)
    w = random_element(P, rng, rng.randint(1, 2), rng.randint(0, 2))
    if w.is_zero():
        return
    secs = [random_section(P, rng) for _ in range(2)]
    f = Poly.parse("x^2 - 3*y + 1", P.base)
    assert leibniz_check(w, secs, f).ok


def test_body_determinacy_examples():
    T = tangent(1)
    mu = W("mu1", T)
    assert body_determinacy(mu, W("mu1", T))
    assert not body_determinacy(mu, mu + W("x*dx*th1", T))


@given(seeds)
def test_body_determinacy_implies_equality(seed):
    P = LIB["tangent2"]
    rng = rng_of(seed)
    p, q = rng.randint(0, 2), rng.randint(0, 2)
    w = random_element(P, rng, p, q)
    w2 = w if rng.random() < 0.5 else w + random_element(P, rng, p, q)
    if w.is_zero() or w2.is_zero():
        return
    assert body_determinacy(w, w2) == (w == w2)


@given(seeds, st.sampled_from(sorted(LIB)))
def test_reconstruction_roundtrip(seed, name):
    P = LIB[name]
    rng = rng_of(seed)
    w = random_element(P, rng, rng.randint(0, 2), rng.randint(0, 2))
    if not w.is_zero():
        assert reconstruct_from_element(w) == w


def _conn(P, entries):
    return Connection(P, {k: Poly.parse(v, P.base) for k, v in entries.items()})


def test_i_nabla_examples():
    T = tangent(1)
    assert i_nabla(Connection(T), W("nu1", T, "nabla")) == W("mu1", T)
    conn = _conn(T, {(0, 0, 0): "1"})
    img = i_nabla(conn, W("nu1", T, "nabla"))
    assert img == W("mu1 + dx*th1", T)
    alpha = lambda_section(T)
    assert eval_component(img, [alpha], None, 0) == conn.covariant_form(0, alpha)
    assert i_nabla(conn, W("dx", T, "nabla")) == W("dx", T)


@given(seeds)
def test_i_nabla_morphism_and_bijective(seed):
    P = LIB["tangent2"]
    rng = rng_of(seed)
    conn = _conn(P, {(0, 0, 1): "x*y", (1, 1, 0): "2", (0, 1, 0): "y^2"})
    for p, q in ((0, 0), (1, 0), (0, 1), (1, 1)):
        x = i_nabla_inverse(conn, random_element(P, rng, p, q))
        assert i_nabla_inverse(conn, i_nabla(conn, x)) == x
    a = i_nabla_inverse(conn, random_element(P, rng, 1, 1))
    b = i_nabla_inverse(conn, random_element(P, rng, 1, 0))
    assert i_nabla(conn, weil_product(a, b)) == weil_product(i_nabla(conn, a), i_nabla(conn, b))
    x = i_nabla_inverse(conn, random_element(P, rng, 1, 1))
    assert nabla_dv(conn, nabla_dv(conn, x)).is_zero()
    assert nabla_dh(conn, nabla_dh(conn, x)).is_zero()
