"""Calibration vector fields certifying sharp area bounds for free-boundary
minimal k-submanifolds of geodesic balls in the round sphere.

The public surface covers the composite field construction (build_W,
eval_W), the line-density ODE system (solve_h_for and its closed-form
oracles), and the verification battery (div_bound_scan, area_balance,
sign_scan, euclid_limit_compare).
"""

from ._backend import BACKEND
from .composite import (
    CompositeField,
    boundary_samples,
    build_W,
    div_W_along_plane,
    euclid_limit_compare,
    eval_W,
    singularity_scaling,
    sup_div_W,
    tangency_residual,
)
from .errors import (
    DomainError,
    InvalidSpec,
    QuadratureFailure,
    SignViolation,
    SingularPoint,
    SphereCalibError,
    StiffnessFailure,
    UnsupportedDimension,
)
from .fields import PlaneBasis, RadialAtom, phi_profile, psi_profile, sup_div
from .hsystem import (
    HSolution,
    constraint_check,
    h_min_scan,
    solve_h,
    solve_h_for,
    wronskian_check,
)
from .quadrature import QuadratureSpec
from .sphere import (
    BallSpec,
    GeodesicRay,
    SpherePoint,
    TangentVector,
    dist,
    exp_map,
    gamma_of,
    grad_dist,
    make_spec,
    sin_power_integral,
    unit_sphere_area,
    vol_ball,
)
from .verify import (
    AreaBalanceReport,
    DivergenceReport,
    area_balance,
    div_bound_scan,
    equality_plane_divergence,
    flagged_windows,
    sign_scan,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AreaBalanceReport",
    "BallSpec",
    "CompositeField",
    "DivergenceReport",
    "DomainError",
    "GeodesicRay",
    "HSolution",
    "InvalidSpec",
    "PlaneBasis",
    "QuadratureFailure",
    "QuadratureSpec",
    "RadialAtom",
    "SignViolation",
    "SingularPoint",
    "SpherePoint",
    "SphereCalibError",
    "StiffnessFailure",
    "TangentVector",
    "UnsupportedDimension",
    "area_balance",
    "boundary_samples",
    "build_W",
    "constraint_check",
    "dist",
    "div_W_along_plane",
    "div_bound_scan",
    "equality_plane_divergence",
    "euclid_limit_compare",
    "eval_W",
    "exp_map",
    "flagged_windows",
    "gamma_of",
    "grad_dist",
    "h_min_scan",
    "make_spec",
    "phi_profile",
    "psi_profile",
    "sign_scan",
    "sin_power_integral",
    "singularity_scaling",
    "solve_h",
    "solve_h_for",
    "sup_div",
    "sup_div_W",
    "tangency_residual",
    "unit_sphere_area",
    "vol_ball",
    "wronskian_check",
]
