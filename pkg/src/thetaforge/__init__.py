"""Exact q-series engine for theta-function identities and lattice decompositions."""

from .series import Monomial, Series
from .theta import ThetaCombo, ThetaFactor, expand_combo, expand_theta
from .lattice import cosets, det, smith, theorem_reps
from .decompose import decompose, decompose_full

__version__ = "0.1.0"

__all__ = [
    "Monomial",
    "Series",
    "ThetaFactor",
    "ThetaCombo",
    "expand_theta",
    "expand_combo",
    "det",
    "smith",
    "cosets",
    "theorem_reps",
    "decompose",
    "decompose_full",
]
