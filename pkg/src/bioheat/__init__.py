"""Tissue temperature during magnetic-nanoparticle hyperthermia.

Three independent solvers for the perfused heat equation in spherical
symmetry (integral transform, Green's function, explicit finite
differences) plus the linear-response nanoparticle power model.
"""

from .errors import (
    BioheatError,
    ConfigError,
    ConvergenceError,
    DivergenceError,
    OutOfRangeError,
    SingularityError,
    StabilityError,
    UnsupportedCombinationError,
)
from .model import REFERENCE_SOURCES, REFERENCE_TISSUE, HeatSource, RadialProfile, SourceKind, TissueProperties

__version__ = "0.1.0"

__all__ = [
    "BioheatError",
    "ConfigError",
    "ConvergenceError",
    "DivergenceError",
    "HeatSource",
    "OutOfRangeError",
    "REFERENCE_SOURCES",
    "REFERENCE_TISSUE",
    "RadialProfile",
    "SingularityError",
    "SourceKind",
    "StabilityError",
    "TissueProperties",
    "UnsupportedCombinationError",
]
