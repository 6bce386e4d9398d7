"""Benchmark harness and command-line interface."""
from .experiment import (
    DEFAULT_ETA,
    ExperimentConfig,
    ExperimentReport,
    SeedRecord,
    SweepRow,
    gaussian_baseline,
    run_experiment,
    sweep,
    tune_eta,
)

__all__ = [
    "DEFAULT_ETA",
    "ExperimentConfig",
    "ExperimentReport",
    "SeedRecord",
    "SweepRow",
    "gaussian_baseline",
    "run_experiment",
    "sweep",
    "tune_eta",
]
