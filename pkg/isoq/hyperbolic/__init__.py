"""
Upper half-plane model and the modular quotient.
"""

from .cosets import PSL2, SL2, CosetTable, coset_reps, orbifold_multiplicity, same_coset, saturation_width
from .geodesics import (
    EllipticCircle,
    Geodesic,
    HyperbolicCircle,
    admissible_circle_radius,
    circle_holonomy,
    equivariant_circle,
    geodesic_from_hyperbolic,
    geodesic_section,
    hyperbolic_circle,
)
from .intersections import GeodesicIntersection, predict_geodesic_pairing, quotient_geodesic_intersections
from .moebius import IDENTITY, S, T, MoebiusElement, hyperbolic_kernel, j_factor, moebius_apply
from .petersson import compare_routes, petersson_norm
from .series import (
    CuspFormEvaluator,
    elliptic_series,
    elliptic_series_evaluator,
    geodesic_norm,
    geodesic_pairing,
    geodesic_series,
    katok_constant,
    measure_katok_constant,
    modularity_check,
    modularity_residual,
    nonvanishing_witness,
    relative_poincare_series,
    sample_points,
)

__all__ = [
    "PSL2",
    "SL2",
    "CosetTable",
    "coset_reps",
    "orbifold_multiplicity",
    "same_coset",
    "saturation_width",
    "EllipticCircle",
    "Geodesic",
    "HyperbolicCircle",
    "admissible_circle_radius",
    "circle_holonomy",
    "equivariant_circle",
    "geodesic_from_hyperbolic",
    "geodesic_section",
    "hyperbolic_circle",
    "GeodesicIntersection",
    "predict_geodesic_pairing",
    "quotient_geodesic_intersections",
    "IDENTITY",
    "S",
    "T",
    "MoebiusElement",
    "hyperbolic_kernel",
    "j_factor",
    "moebius_apply",
    "compare_routes",
    "petersson_norm",
    "CuspFormEvaluator",
    "elliptic_series",
    "elliptic_series_evaluator",
    "geodesic_norm",
    "geodesic_pairing",
    "geodesic_series",
    "katok_constant",
    "measure_katok_constant",
    "modularity_check",
    "modularity_residual",
    "nonvanishing_witness",
    "relative_poincare_series",
    "sample_points",
]
