"""Variational paths around a fixed center and a collision Kepler primary.

The package constructs collision Kepler orbits for the moving primary,
minimizes the trajectory action of a massless particle over constrained
path classes, and analyses the minimizers: near-collision power laws,
limiting radius ratios against the roots of the boundary-angle function
h, angular monotonicity, and mirror-extended (quasi-)periodic solutions.
"""

from .action import (
    DiscretePath,
    FixedPoint,
    Origin,
    Ray,
    TimeGrid,
    action_gradient,
    build_grid,
    discrete_action,
    el_residual,
    free_coordinates,
    n_free_coordinates,
    with_free_coordinates,
)
from .analysis import (
    CollisionScan,
    LimitAngleFit,
    PowerLawFit,
    RatioSeries,
    ThetaProfile,
    angular_momentum,
    collision_scan,
    decay_exponents,
    fit_power_law,
    innermost_decade_mean,
    limit_angle_estimate,
    ratio_limits,
    theta_profile,
    unwrap_angles,
)
from .errors import DomainError, MeshTooCoarseError, NumericalFailure, SingularityError
from .kepler import (
    ExtendedOrbit,
    KeplerArc,
    arc_from_apoapsis,
    arc_from_boundary,
    extended_orbit,
    kepler_radius,
    parabolic_scale,
)
from .minimizer import (
    MeshSpec,
    ProblemConfig,
    SolveReport,
    SolverSpec,
    interpolate_path,
    minimize,
    mirror_path,
    refine_and_polish,
    solve,
)
from .periodic import ClosureCheck, PeriodicSolution, build_periodic, closure_check, closure_count
from .potential import (
    FieldParams,
    angular_monotonicity_check,
    force,
    pair_force,
    pair_potential,
    potential,
)
from .roots import RootTriple, coercivity_constant, eval_h, eval_h_dtheta, find_alphas

__all__ = [
    "CollisionScan",
    "ClosureCheck",
    "DiscretePath",
    "DomainError",
    "ExtendedOrbit",
    "FieldParams",
    "FixedPoint",
    "KeplerArc",
    "LimitAngleFit",
    "MeshSpec",
    "MeshTooCoarseError",
    "NumericalFailure",
    "Origin",
    "PeriodicSolution",
    "PowerLawFit",
    "ProblemConfig",
    "RatioSeries",
    "Ray",
    "RootTriple",
    "SingularityError",
    "SolveReport",
    "SolverSpec",
    "ThetaProfile",
    "TimeGrid",
    "action_gradient",
    "angular_momentum",
    "angular_monotonicity_check",
    "arc_from_apoapsis",
    "arc_from_boundary",
    "build_grid",
    "build_periodic",
    "closure_check",
    "closure_count",
    "coercivity_constant",
    "collision_scan",
    "decay_exponents",
    "discrete_action",
    "el_residual",
    "eval_h",
    "eval_h_dtheta",
    "extended_orbit",
    "find_alphas",
    "fit_power_law",
    "force",
    "free_coordinates",
    "innermost_decade_mean",
    "interpolate_path",
    "kepler_radius",
    "limit_angle_estimate",
    "minimize",
    "mirror_path",
    "n_free_coordinates",
    "pair_force",
    "pair_potential",
    "parabolic_scale",
    "potential",
    "ratio_limits",
    "refine_and_polish",
    "solve",
    "theta_profile",
    "unwrap_angles",
    "with_free_coordinates",
]

__version__ = "0.1.0"
