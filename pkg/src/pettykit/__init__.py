"""Convex polytopes, (L_p, Q) polar projection bodies and Monte-Carlo checks of
projection inequalities for rotationally invariant convex measures."""
__version__ = "0.1.0"

from .bodies import make_standard, minkowski_functional, polar, support
from .errors import (
    ConcavityViolation,
    ConfigError,
    DegenerateDirection,
    DegenerateInput,
    DegenerateSample,
    DimensionMismatch,
    InvalidEps,
    InvalidP,
    OriginNotInterior,
    OutOfRange,
    PettyKitError,
    UnknownName,
)
from .geometry import Polytope, convex_hull, hausdorff_distance, project, reflect, volume
from .measures import Estimate, RadialMeasure, radial_mass, star_body_measure, validate_concavity
from .mixed import lp_mixed_volume, lp_surface_area, mixed_volume, mixed_volume_first
from .projbody import StarBodySpec, classical_proj_body, polar_proj_radial, polar_projection_body
from .symmetrize import shadow_system, steiner, symmetrization_flow

__all__ = [
    "ConcavityViolation", "ConfigError", "DegenerateDirection", "DegenerateInput", "DegenerateSample",
    "DimensionMismatch", "Estimate", "InvalidEps", "InvalidP", "OriginNotInterior", "OutOfRange",
    "PettyKitError", "Polytope", "RadialMeasure", "StarBodySpec", "UnknownName", "classical_proj_body",
    "convex_hull", "hausdorff_distance", "lp_mixed_volume", "lp_surface_area", "make_standard",
    "minkowski_functional", "mixed_volume", "mixed_volume_first", "polar", "polar_proj_radial",
    "polar_projection_body", "project", "radial_mass", "reflect", "shadow_system", "star_body_measure",
    "steiner", "support", "symmetrization_flow", "validate_concavity", "volume",
]
