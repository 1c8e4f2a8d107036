import random
from fractions import Fraction
from itertools import combinations

from hypothesis import HealthCheck, settings, strategies as st

from weilalg.exactpoly import Poly, chart
from weilalg.polyforms import PolyForm, PolyVectorField
from weilalg.weilflat import random_poly

settings.register_profile("default", deadline=None, derandomize=True, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

XY = chart("x", "y")
XYZ = chart("x", "y", "z")

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
seeds = st.integers(min_value=0, max_value=10**6)


@st.composite
def polys(draw, c=XY, max_degree=2, max_terms=4):
    exps = st.tuples(*[st.integers(0, max_degree)] * c.dim)
    terms = draw(st.dictionaries(exps, small_fracs, max_size=max_terms))
    return Poly(c, terms)


@st.composite
def forms(draw, c=XYZ, max_degree=2):
    keys = [k for r in range(c.dim + 1) for k in combinations(range(c.dim), r)]
    out = PolyForm.zero(c)
    for _ in range(draw(st.integers(0, 3))):
        out = out + PolyForm.basis(c, draw(st.sampled_from(keys)), draw(polys(c, max_degree, 3)))
    return out


@st.composite
def fields(draw, c=XYZ):
    return PolyVectorField(c, [draw(polys(c, 2, 2)) for _ in range(c.dim)])


def rng_poly(c, seed, degree=2, terms=3):
    return random_poly(c, random.Random(seed), degree, terms)


def frac(x):
    return Fraction(x)


# --- acceptance summary: one PASS/FAIL line per criterion ------------------------------------

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.failed:
        _ACCEPTANCE[name] = "PASS" if report.passed and _ACCEPTANCE.get(name) != "FAIL" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        n = int(name.split("_")[2])
        terminalreporter.write_line(f"criterion {n:2d}: {_ACCEPTANCE[name]}  ({name})")
