import pytest
from hypothesis import given, strategies as st

from conftest import seeds
from helpers import random_bs_form, random_section, rng_of, operator_identities
from weilalg import groupoid as gmod
from weilalg.algebroid import Section, check_axioms
from weilalg.exactpoly import Poly
from weilalg.groupoid import (BSForm, J_op, NotNormalized, R_op, bs_delta, check_groupoid, check_simplicial,
                              compatibility_check, groupoid_library, is_normalized, lie_algebroid_of,
                              multiplicative_check, pair_groupoid, perturbed_mult_groupoid, random_normalized_form,
                              right_invariant_vf, translation_groupoid, vanest)
from weilalg.polyforms import PolyForm, PolyVectorField
from weilalg.weilflat import WeilElement

GL = groupoid_library()


def poly(G, p, s):
    return Poly.parse(s, G.nerve(p).chart)


def same(a: BSForm, b: BSForm) -> bool:
    return (a - b).is_zero()


@pytest.mark.parametrize("name", sorted(GL))
def test_library_groupoids(name):
    G = GL[name]
    assert check_groupoid(G).ok
    assert check_simplicial(G, 4).ok
    assert check_axioms(lie_algebroid_of(G)).ok


def test_perturbed_mult_fails_associativity():
    rep = check_groupoid(perturbed_mult_groupoid())
    assert not rep.ok and "(gh)k = g(hk)" in rep.failed_identities()


def test_pair_faces_and_degeneracies():
    G = pair_groupoid(1)
    assert G.nerve(1).chart.coords == ("x0", "x1")
    assert G.face(1, 0).components == (Poly.parse("x1", G.face(1, 0).source),)
    assert G.face(1, 1).components == (Poly.parse("x0", G.face(1, 1).source),)
    s0 = G.degeneracy(1, 0)
    assert s0.components == tuple(Poly.parse(v, s0.source) for v in ("x0", "x0", "x1"))


def test_delta_examples():
    G = pair_groupoid(1)
    assert bs_delta(BSForm.parse(G, 1, "x1 - x0")).is_zero()
    assert bs_delta(BSForm.parse(G, 0, "1")).is_zero()


def test_normalization_examples():
    G = pair_groupoid(1)
    assert is_normalized(BSForm.parse(G, 1, "x1 - x0"))
    assert not is_normalized(BSForm.parse(G, 1, "1"))
    assert is_normalized(BSForm.parse(G, 0, "x^2 dx"))


def test_right_invariant_examples():
    G = pair_groupoid(1)
    g = Section.from_strings(G.M, ["x^2 + 1"])
    assert right_invariant_vf(G, g, 1) == PolyVectorField.from_strings(G.nerve(1).chart, ["x0^2 + 1", "0"])
    assert right_invariant_vf(G, g, 2) == PolyVectorField.from_strings(G.nerve(2).chart, ["x0^2 + 1", "0", "0"])
    T = translation_groupoid()
    one = Section.from_strings(T.M, ["1"])
    assert right_invariant_vf(T, one, 1) == PolyVectorField.from_strings(T.nerve(1).chart, ["1", "0"])


def test_lie_algebroid_examples():
    A = lie_algebroid_of(pair_groupoid(2))
    assert [[str(p) for p in row] for row in A.anchor] == [["1", "0"], ["0", "1"]] and not A.structure
    A = lie_algebroid_of(translation_groupoid())
    assert [[str(p) for p in row] for row in A.anchor] == [["1"]] and not A.structure
    H = lie_algebroid_of(GL["H3"])
    assert str(H.c(2, 0, 1)) == "-1"
    assert all(H.c(i, j, k).is_zero() for i in range(3) for j in range(3) for k in range(3) if i != 2)


def test_R_J_examples():
    G = pair_groupoid(1)
    g = Section.from_strings(G.M, ["x^2 + 1"])
    w = BSForm.parse(G, 1, "x1 - x0")
    assert R_op(g, w).form == PolyForm.parse("-x^2 - 1", G.M)
    assert J_op(g, w).is_zero()
    with pytest.raises(gmod.GroupoidError):
        R_op(g, BSForm.parse(G, 0, "x"))


def test_vanest_examples():
    G = pair_groupoid(1)
    A = lie_algebroid_of(G)
    f = BSForm.parse(G, 0, "x^3 + 1")
    assert vanest(f) == WeilElement.parse("x^3 + 1", A)
    assert vanest(BSForm.parse(G, 1, "x1 - x0")) == WeilElement.parse("th1", A)
    with pytest.raises(NotNormalized) as e:
        vanest(BSForm.parse(G, 1, "1"))
    assert e.value.index == 0


def test_multiplicative_examples():
    G = pair_groupoid(1)
    c1 = G.nerve(1).chart
    assert multiplicative_check(G, PolyForm.parse("x1 - x0", c1)).ok
    assert multiplicative_check(G, PolyForm.parse("dx1 - dx0", c1)).ok
    assert not multiplicative_check(G, PolyForm.parse("x0*x1", c1)).ok


@given(seeds, st.sampled_from(sorted(GL)))
def test_delta_squared_and_commutes_with_d(seed, name):
    G = GL[name]
    rng = rng_of(seed)
    w = random_bs_form(G, rng.randint(0, 2), rng.randint(0, 2), rng)
    assert bs_delta(bs_delta(w)).is_zero()
    assert same(bs_delta(w.d()), bs_delta(w).d())


@given(seeds, st.sampled_from(sorted(GL)))
def test_R_J_operator_identities(seed, name):
    res = operator_identities(GL[name], rng_of(seed))
    assert all(res.values()), [k for k, v in res.items() if not v]


@given(seeds, st.sampled_from(sorted(GL)))
def test_R_J_preserve_normalized(seed, name):
    G = GL[name]
    A = lie_algebroid_of(G)
    rng = rng_of(seed)
    w = random_normalized_form(G, rng.randint(2, 3), rng.randint(0, 2), rng)
    a = random_section(A, rng)
    assert is_normalized(R_op(a, w)) and is_normalized(J_op(a, w))


@given(seeds, st.sampled_from(["pair1", "pair2", "RxR", "H3"]), st.integers(0, 3), st.integers(0, 2))
def test_vanest_contract(seed, name, p, q):
    G = GL[name]
    w = random_normalized_form(G, p, q, rng_of(seed))
    assert compatibility_check(w).ok


def test_vanest_contract_is_sign_sensitive(monkeypatch):
    flipped = lambda a, w: J_op(a, w).scale(-1)
    monkeypatch.setattr(gmod, "J_op", flipped)
    bad = 0
    for seed in range(12):
        for name in ("pair1", "RxR", "pair2"):
            w = random_normalized_form(GL[name], 2, 1, rng_of(seed))
            bad += not compatibility_check(w).ok
    assert bad > 0
