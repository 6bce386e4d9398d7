"""Heat-conduction forward models and their containers."""
from .models import (
    BenchmarkProblem,
    LinearModel,
    NonlinearModel,
    SmoothnessOperator,
    finite_diff_jacobian,
    first_difference_operator,
)
from .problems import (
    PROBLEM_NAMES,
    build_cauchy_problem,
    build_flux_problem,
    build_problem,
    build_robin_stationary,
    build_robin_transient,
    export_operators,
    load_linear_problem,
)

__all__ = [
    "BenchmarkProblem",
    "LinearModel",
    "NonlinearModel",
    "SmoothnessOperator",
    "finite_diff_jacobian",
    "first_difference_operator",
    "PROBLEM_NAMES",
    "build_cauchy_problem",
    "build_flux_problem",
    "build_problem",
    "build_robin_stationary",
    "build_robin_transient",
    "export_operators",
    "load_linear_problem",
]
