from hypothesis import given

from conftest import XY, XYZ, fields, forms
from weilalg.exactpoly import PolyMap, chart
from weilalg.polyforms import (PolyForm, PolyVectorField, form_d, form_interior, form_lie, form_pullback,
                               form_wedge)


def F(s, c=XY):
    return PolyForm.parse(s, c)


def V(comps, c=XY):
    return PolyVectorField.from_strings(c, comps)


def test_wedge_examples():
    assert form_wedge(F("dx"), F("dy")) == F("dx^dy")
    assert form_wedge(F("dx"), F("dx")).is_zero()
    assert form_wedge(F("x dy"), F("y dx")) == F("-x*y dx^dy")


def test_d_examples():
    assert form_d(F("x dy")) == F("dx^dy")
    assert form_d(F("x^2")) == F("2*x dx")
    assert form_d(F("dx^dy")).is_zero()


def test_interior_examples():
    assert form_interior(V(["1", "0"]), F("dx^dy")) == F("dy")
    assert form_interior(V(["0", "1"]), F("dx")).is_zero()
    assert form_interior(V(["x", "0"]), F("x dx^dy")) == F("x^2 dy")


def test_lie_examples():
    assert form_lie(V(["0", "x"]), F("dy")) == F("dx")
    assert form_lie(V(["1", "0"]), F("x dy")) == F("dy")
    assert form_lie(V(["x", "y"]), F("1")).is_zero()


def test_pullback_examples():
    diag = PolyMap.from_strings(chart("x"), XY, ["x", "x"])
    assert form_pullback(diag, F("dy")) == PolyForm.parse("dx", chart("x"))
    assert form_pullback(diag, F("dx^dy")).is_zero()
    u = chart("u")
    assert form_pullback(PolyMap.from_strings(u, XY, ["u", "u"]), F("y - x")).is_zero()


def test_parse_roundtrip():
    w = F("x*y dx^dy + 1/2 dx - 3")
    assert F(str(w)) == w


@given(forms())
def test_d_squared(a):
    assert form_d(form_d(a)).is_zero()


@given(fields(), forms())
def test_cartan_formula(X, a):
    assert form_lie(X, a) == form_d(form_interior(X, a)) + form_interior(X, form_d(a))


@given(fields(), fields(), forms())
def test_g_dg_relations(X, Y, a):
    br = X.bracket(Y)
    assert form_lie(X, form_interior(Y, a)) - form_interior(Y, form_lie(X, a)) == form_interior(br, a)
    assert (form_interior(X, form_interior(Y, a)) + form_interior(Y, form_interior(X, a))).is_zero()


@given(forms(), forms())
def test_wedge_leibniz(a, b):
    lhs = form_d(form_wedge(a, b))
    odd = PolyForm(a.chart, {k: v for k, v in a.comps.items() if len(k) % 2})
    even = a - odd
    rhs = form_wedge(form_d(a), b) + form_wedge(even, form_d(b)) - form_wedge(odd, form_d(b))
    assert lhs == rhs


@given(forms(XYZ, 1))
def test_pullback_functorial(a):
    UV = chart("u", "v")
    T = chart("t")
    g = PolyMap.from_strings(UV, XYZ, ["u*v", "u + v^2", "v"])
    f = PolyMap.from_strings(T, UV, ["t^2", "1 - t"])
    assert form_pullback(g.compose(f), a) == form_pullback(f, form_pullback(g, a))
