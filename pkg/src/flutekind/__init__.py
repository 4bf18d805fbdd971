"""Classification of flute surfaces from Fenchel-Nielsen coordinates."""
from .criterion import (
    ClassifyOptions,
    CriterionReport,
    Thresholds,
    classify,
    classify_patchwork,
    criterion_terms,
    horocyclic_partial_length,
    shear_sequence,
)
from .flute_model import FluteSurface, SequenceSpec, SurfaceValidationError, eta_length
from .patchwork import Patchwork, RestrictedPatchwork, u_prime_sequence, u_sequence

__version__ = "0.1.0"

__all__ = [
    "ClassifyOptions",
    "CriterionReport",
    "FluteSurface",
    "Patchwork",
    "RestrictedPatchwork",
    "SequenceSpec",
    "SurfaceValidationError",
    "Thresholds",
    "classify",
    "classify_patchwork",
    "criterion_terms",
    "eta_length",
    "horocyclic_partial_length",
    "shear_sequence",
    "u_prime_sequence",
    "u_sequence",
]
