"""Inexact potential reduction interior point methods for linear programming."""

__version__ = "0.1.0"

from .ipm import (
    CERTIFICATE,
    ITERATION_LIMIT,
    NUMERICAL_FAILURE,
    OPTIMAL,
    Iterate,
    SolveParams,
    SolveResult,
    certify_output,
    run_feasible,
    run_infeasible,
)
from .kernels import BACKEND
from .lp_core import (
    LinearProgram,
    find_strict_start,
    generate_bounded_optimal_instance,
    generate_feasible_instance,
    parse_mps,
    read_lp,
    write_mps,
)
from .scaled_newton import InnerControls

__all__ = [
    "BACKEND", "CERTIFICATE", "ITERATION_LIMIT", "NUMERICAL_FAILURE", "OPTIMAL",
    "InnerControls", "Iterate", "LinearProgram", "SolveParams", "SolveResult",
    "certify_output", "find_strict_start", "generate_bounded_optimal_instance",
    "generate_feasible_instance", "parse_mps", "read_lp", "run_feasible",
    "run_infeasible", "write_mps",
]
