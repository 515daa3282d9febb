"""Numerical laboratory for sharp Strichartz constants (Schrodinger n=1,2; wave n=2,3)."""
from .grid import Grid, ComplexField, SpaceTimeField, forward_fourier, inverse_fourier
from .propagators import EvolutionSpec, WaveSplitPair, QuotientReport
from .closed_forms import sharp_constant, ExpQuadraticParams, ConeExpParams

__version__ = "0.1.0"

__all__ = [
    "Grid", "ComplexField", "SpaceTimeField", "forward_fourier", "inverse_fourier",
    "EvolutionSpec", "WaveSplitPair", "QuotientReport",
    "sharp_constant", "ExpQuadraticParams", "ConeExpParams",
]
