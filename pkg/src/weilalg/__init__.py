"""Exact computer algebra for the Weil algebra of Lie algebroids, the
Bott–Shulman complex of polynomial groupoids and the Van Est map."""

from .algebroid import AlgebroidPresentation, Section, check_axioms, library
from .exactpoly import Chart, Poly, PolyMap, chart
from .groupoid import BSForm, SplitGroupoid, lie_algebroid_of, vanest
from .polyforms import PolyForm, PolyVectorField
from .report import CertReport
from .weilflat import WeilElement, check_d2, weil_dh, weil_dv

__version__ = "0.1.0"

__all__ = [
    "AlgebroidPresentation", "BSForm", "CertReport", "Chart", "Poly", "PolyForm", "PolyMap", "PolyVectorField",
    "Section", "SplitGroupoid", "WeilElement", "chart", "check_axioms", "check_d2", "library", "lie_algebroid_of",
    "vanest", "weil_dh", "weil_dv",
]
