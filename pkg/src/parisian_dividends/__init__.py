"""Impulse dividend optimization with Parisian ruin for spectrally negative
Levy models: exact scale-function analytics, an optimal (a, b) policy solver,
numerical verification of the optimality conditions, and a Monte Carlo
cross-validator.
"""
from .errors import (
    ConfigError,
    DegenerateRootsError,
    DomainError,
    ModelError,
    ParisianDividendsError,
    QuadratureError,
    SolverError,
)
from .levy_model import (
    ControlParams,
    ConvexityReport,
    LevyModel,
    check_log_convex_tail,
    laplace_exponent,
    laplace_exponent_derivative,
    levy_tail,
    right_inverse,
)
from .montecarlo import (
    MCEstimate,
    PathSample,
    SimConfig,
    default_horizon,
    estimate_first_passage,
    estimate_value,
    simulate_controlled_path,
    simulate_paths,
)
from .policy import (
    OptimalSolution,
    Policy,
    ValueFunction,
    cost_adjusted_slope,
    optimal_pair,
    policy_performance,
    rightmost_slope_minimizer,
    value_function,
)
from .scale import (
    ExpSum,
    ParisianScale,
    laplace_exponent_roots,
    parisian_scale,
    scale_function,
)
from .verify import (
    GapReport,
    HJBGrid,
    HJBReport,
    generator_apply,
    hjb_check,
    policy_kink,
    smooth_fit_check,
    value_gap_check,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ControlParams",
    "ConvexityReport",
    "DegenerateRootsError",
    "DomainError",
    "ExpSum",
    "GapReport",
    "HJBGrid",
    "HJBReport",
    "LevyModel",
    "MCEstimate",
    "ModelError",
    "OptimalSolution",
    "ParisianDividendsError",
    "ParisianScale",
    "PathSample",
    "Policy",
    "QuadratureError",
    "SimConfig",
    "SolverError",
    "ValueFunction",
    "check_log_convex_tail",
    "cost_adjusted_slope",
    "default_horizon",
    "estimate_first_passage",
    "estimate_value",
    "generator_apply",
    "hjb_check",
    "laplace_exponent",
    "laplace_exponent_derivative",
    "laplace_exponent_roots",
    "levy_tail",
    "optimal_pair",
    "parisian_scale",
    "policy_kink",
    "policy_performance",
    "right_inverse",
    "rightmost_slope_minimizer",
    "scale_function",
    "simulate_controlled_path",
    "simulate_paths",
    "smooth_fit_check",
    "value_function",
    "value_gap_check",
]
