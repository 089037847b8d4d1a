"""Inexact proximal online gradient methods for time-varying composite objectives."""

from .metrics import RunReport, bound_constants, gradient_variation, regret, regret_bound_check
from .oracle import OracleConfig, compute_optima, path_stats, per_step_optimum
from .problem import DynamicProblem, ErrorModel, TheoreticalConstants, validate_constants
from .solvers import DivergenceError, SolverConfig, run, run_ipogd, run_opiss, run_opsvrg

__version__ = "0.1.0"

__all__ = [
    "RunReport", "bound_constants", "gradient_variation", "regret", "regret_bound_check",
    "OracleConfig", "compute_optima", "path_stats", "per_step_optimum",
    "DynamicProblem", "ErrorModel", "TheoreticalConstants", "validate_constants",
    "DivergenceError", "SolverConfig", "run", "run_ipogd", "run_opiss", "run_opsvrg",
]
