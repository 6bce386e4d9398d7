"""Robust Bayesian inversion with Student-t noise and variational approximation."""
from .distributions import (
    GammaParams,
    StudentTParams,
    digamma,
    gamma_density,
    gamma_moments,
    student_t_density,
)
from .errors import (
    ConfigurationError,
    DegenerateMaskError,
    DimensionError,
    FactorizationError,
    ParameterDomainError,
    SolverError,
    UndefinedMetricError,
)
from .forward_models.problems import PROBLEM_NAMES, build_problem
from .noise_metrics import NoiseSpec, corrupt, relative_error, weight_separation
from .nonlinear_solver import OuterConfig, linearize, run_vb_nonlinear
from .vb_solver import HyperConfig, VBState, run_vb_linear

__version__ = "0.1.0"

__all__ = [
    "GammaParams",
    "StudentTParams",
    "digamma",
    "gamma_density",
    "gamma_moments",
    "student_t_density",
    "ConfigurationError",
    "DegenerateMaskError",
    "DimensionError",
    "FactorizationError",
    "ParameterDomainError",
    "SolverError",
    "UndefinedMetricError",
    "PROBLEM_NAMES",
    "build_problem",
    "NoiseSpec",
    "corrupt",
    "relative_error",
    "weight_separation",
    "OuterConfig",
    "linearize",
    "run_vb_nonlinear",
    "HyperConfig",
    "VBState",
    "run_vb_linear",
]
