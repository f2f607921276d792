"""Solve v^5 - 40 Z v^2 - 5 Z v - Z by iterating an icosahedral map of degree 31."""

from .binform import BinaryForm, LinearAction, PlaneMap, PrecisionContext, ProjPoint
from .pipeline import RunConfig, SolveReport, derive, load, resolvent, save, solve

__all__ = [
    "BinaryForm", "LinearAction", "PlaneMap", "PrecisionContext", "ProjPoint",
    "RunConfig", "SolveReport", "derive", "load", "resolvent", "save", "solve",
]
__version__ = "0.1.0"
