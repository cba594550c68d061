"""Saddle configurations of classical electrons in a nucleus plus static field."""

from .estimator import SaddleSearch
from .finder import NewtonResult, SearchParams, newton_refine, random_configuration, search
from .model import (
    ModelParams,
    SingularConfigurationError,
    gradient,
    hessian,
    potential_energy,
    rescale,
)
from .records import RunManifest, SaddleRecord, read_store, write_store
from .ring import (
    RingPlusCenterSaddle,
    RingSaddle,
    max_ring_n,
    repulsion_sum,
    ring_plus_center_saddle,
    ring_saddle,
    w_fit,
)
from .stability import ExponentReport, StabilitySpectrum, analyze, exponents, reaction_coordinate
from .symmetry import CanonicalForm, SymmetryLabel, canonicalize, classify, equivalent

__version__ = "0.1.0"

__all__ = [
    "CanonicalForm",
    "ExponentReport",
    "ModelParams",
    "NewtonResult",
    "RingPlusCenterSaddle",
    "RingSaddle",
    "RunManifest",
    "SaddleRecord",
    "SaddleSearch",
    "SearchParams",
    "SingularConfigurationError",
    "StabilitySpectrum",
    "SymmetryLabel",
    "analyze",
    "canonicalize",
    "classify",
    "equivalent",
    "exponents",
    "gradient",
    "hessian",
    "max_ring_n",
    "newton_refine",
    "potential_energy",
    "random_configuration",
    "reaction_coordinate",
    "read_store",
    "repulsion_sum",
    "rescale",
    "ring_plus_center_saddle",
    "ring_saddle",
    "search",
    "w_fit",
    "write_store",
]
