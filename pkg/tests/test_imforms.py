import pytest
from hypothesis import given, strategies as st

from conftest import seeds
from helpers import im_instance, rng_of, transgression_instance
from weilalg.algebroid import cotangent_poisson, library, tangent
from weilalg.imforms import (PreconditionError, c1_determines, check_im, check_transgression, cocycle_from_tau,
                             exact_transgression_data, int_pr_equivalence)
from weilalg.polyforms import PolyForm
from weilalg.weilflat import WeilElement, weil_dh, weil_dv

LIB = library()
GEOMETRIC = ["tangent1", "tangent2", "so3xR3", "poisson_x", "poisson_1+x^2"]


def forms(P, *ss):
    return [PolyForm.parse(s, P.base) for s in ss]


@pytest.mark.parametrize("f", ["1", "x", "1 + x^2"])
def test_poisson_identity_is_im(f):
    P = cotangent_poisson(f)
    tau = forms(P, "dx", "dy")
    assert check_im(P, tau, None, 2).ok
    rep = int_pr_equivalence(P, tau, None, 2)
    assert rep.ok and rep.info["cocycle_ok"]


def test_zero_data_passes():
    P = LIB["tangent2"]
    assert check_im(P, forms(P, "0", "0"), None, 2).ok
    assert cocycle_from_tau(P, forms(P, "0", "0"), None, 2).is_zero()


def test_volume_form_fails_on_both_routes():
    P = tangent(3)
    phi = PolyForm.parse("dx^dy^dz", P.base)
    rep = check_im(P, forms(P, "0", "0", "0"), phi, 2)
    assert not rep.ok and rep.failed_identities() == {"mk-2"}
    eq = int_pr_equivalence(P, forms(P, "0", "0", "0"), phi, 2)
    assert eq.ok and not eq.info["equations_ok"] and not eq.info["cocycle_ok"]


def test_phi_not_closed_is_rejected():
    P = LIB["tangent2"]
    with pytest.raises(PreconditionError):
        check_im(P, forms(P, "0", "0"), PolyForm.parse("x dy", P.base), 1)


def test_tangent1_degree_zero_tau():
    P = LIB["tangent1"]
    tau = forms(P, "1")
    assert check_im(P, tau, None, 1).ok
    s = cocycle_from_tau(P, tau, None, 1)
    assert s == WeilElement.parse("mu1", P)
    assert weil_dv(s).is_zero() and weil_dh(s).is_zero()


@given(seeds, st.sampled_from(GEOMETRIC))
def test_int_pr_verdicts_agree(seed, name):
    P = LIB[name]
    tau, phi, k = im_instance(P, rng_of(seed))
    assert int_pr_equivalence(P, tau, phi, k, seed=seed).ok


@given(seeds, st.sampled_from(GEOMETRIC))
def test_c1_determines_round_trip(seed, name):
    P = LIB[name]
    tau, phi, k = im_instance(P, rng_of(seed))
    sigma = cocycle_from_tau(P, tau, phi, k)
    assert c1_determines(P, sigma, phi) == sigma


def test_c1_determines_edge_cases():
    P = LIB["tangent1"]
    assert c1_determines(P, WeilElement.zero(P)).is_zero()
    with pytest.raises(PreconditionError):
        c1_determines(P, WeilElement.parse("th1*dx", P))


def test_transgression_examples():
    P = LIB["poisson_x"]
    z = forms(P, "0", "0")
    rep = check_transgression(P, z, z, 2)
    assert rep.ok and rep.info["equations_ok"]
    with pytest.raises(PreconditionError):
        check_transgression(P, z, forms(P, "x dy", "0"), 2)


@given(seeds, st.sampled_from(["tangent2", "so3xR3", "poisson_x", "poisson_1+x^2"]), st.booleans())
def test_transgression_routes_agree(seed, name, perturb):
    P = LIB[name]
    l, tau = transgression_instance(P, rng_of(seed), perturb)
    rep = check_transgression(P, l, tau, 2, seed=seed)
    assert rep.ok
    if not perturb:
        assert rep.info["equations_ok"] and rep.info["xi_ok"]


def test_printed_transgression_sign_disagrees():
    P = LIB["tangent2"]
    l, tau = exact_transgression_data(P, PolyForm.parse("x*y dx + y^2 dy", P.base))
    rep = check_transgression(P, l, tau, 2, literal_sign=True)
    assert not rep.ok and rep.info["xi_ok"] and not rep.info["equations_ok"]
