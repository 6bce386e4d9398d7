"""Seeded benchmark runs, corruption-rate sweeps and the Gaussian-noise baseline."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..csvio import write_matrix, write_table
from ..distributions import GammaParams
from ..errors import ConfigurationError, SolverError
from ..forward_models.problems import PROBLEM_NAMES, build_problem
from ..noise_metrics import NoiseSpec, corrupt, relative_error
from ..nonlinear_solver import OuterConfig, run_vb_nonlinear
from ..vb_solver import HyperConfig, run_vb_linear, update_q_u

# default Gaussian-baseline regularization weight per benchmark
DEFAULT_ETA = {"cauchy": 4.64}


def _hyper_from_dict(d: dict) -> HyperConfig:
    d = dict(d)
    for key in ("prior_lambda", "prior_w"):
        if key in d:
            a, b = d[key]
            d[key] = GammaParams(float(a), float(b))
    return HyperConfig(**d)


def _hyper_to_dict(h: HyperConfig) -> dict:
    return {
        "prior_lambda": [float(h.prior_lambda.shape), float(h.prior_lambda.rate)],
        "prior_w": [float(h.prior_w.shape), float(h.prior_w.rate)],
        "tol": h.tol,
        "max_iter": h.max_iter,
        "update_t_params": h.update_t_params,
    }


def _outer_from_dict(d: dict) -> OuterConfig:
    d = dict(d)
    if d.get("u0") is not None:
        d["u0"] = np.asarray(d["u0"], dtype=float)
    return OuterConfig(**d)


def _outer_to_dict(o: OuterConfig) -> dict:
    d = asdict(o)
    if d["u0"] is not None:
        d["u0"] = [float(v) for v in d["u0"]]
    return d


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    corruption_rate: float = 0.5
    seeds: tuple[int, ...] = tuple(range(10))
    hyper: HyperConfig = HyperConfig()
    outer: OuterConfig = OuterConfig()
    baseline_eta: float | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if self.problem not in PROBLEM_NAMES:
            raise ConfigurationError(f"unknown problem {self.problem!r}; expected one of {PROBLEM_NAMES}")
        if len(self.seeds) == 0:
            raise ConfigurationError("at least one seed is required")
        NoiseSpec(self.corruption_rate)
        if self.baseline_eta is not None and not self.baseline_eta > 0:
            raise ConfigurationError("baseline_eta must be positive")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "hyper" in d:
            d["hyper"] = _hyper_from_dict(d["hyper"])
        if "outer" in d:
            d["outer"] = _outer_from_dict(d["outer"])
        if "seeds" in d:
            d["seeds"] = tuple(d["seeds"])
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "corruption_rate": self.corruption_rate,
            "seeds": list(self.seeds),
            "hyper": _hyper_to_dict(self.hyper),
            "outer": _outer_to_dict(self.outer),
            "baseline_eta": self.baseline_eta,
            "output_dir": self.output_dir,
        }


@dataclass
class SeedRecord:
    seed: int
    e: float
    E_lambda: float
    iterations: int
    runtime: float
    outer_iterations: int | None = None
    converged: bool = False
    failed: bool = False
    message: str = ""
    baseline_e: float | None = None
    artifacts: dict[str, Path] = field(default_factory=dict)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list[SeedRecord]
    median_e: float
    median_lambda: float
    report_path: Path | None = None

    @property
    def failed_seeds(self) -> list[int]:
        return [r.seed for r in self.records if r.failed]

    def summary(self) -> str:
        lines = [
            f"problem {self.config.problem}  r={self.config.corruption_rate:g}  seeds={len(self.records)}",
            f"median e        {self.median_e:.6g}",
            f"median E[lambda] {self.median_lambda:.6g}",
        ]
        if self.failed_seeds:
            lines.append(f"failed seeds    {self.failed_seeds}")
        lines.append("seed  e  E[lambda]  iterations  outer  baseline_e  runtime_s  status")
        for r in self.records:
            status = "failed: " + r.message if r.failed else ("converged" if r.converged else "max_iter")
            lines.append(
                f"{r.seed}  {r.e:.6g}  {r.E_lambda:.6g}  {r.iterations}  {r.outer_iterations or '-'}  "
                f"{'-' if r.baseline_e is None else format(r.baseline_e, '.6g')}  {r.runtime:.3f}  {status}"
            )
        return "\n".join(lines) + "\n"


def gaussian_baseline(K, y, L, eta: float) -> np.ndarray:
    """Minimizer of ``||K u - y||^2 + eta ||L u||^2``."""
    if not eta > 0:
        raise ConfigurationError("eta must be positive")
    K = np.asarray(getattr(K, "matrix", K), dtype=float)
    y = np.asarray(y, dtype=float)
    return update_q_u(K, y, getattr(L, "matrix", L), np.ones(y.size), float(eta)).mean


def tune_eta(K, y, L, u_exact, etas=None) -> tuple[float, float]:
    """Grid-search ``eta`` for the smallest relative error; returns ``(eta, e)``."""
    if etas is None:
        etas = np.logspace(-8, 8, 81)
    best = (math.nan, math.inf)
    for eta in etas:
        try:
            e = relative_error(gaussian_baseline(K, y, L, eta), u_exact)
        except SolverError:
            continue
        if e < best[1]:
            best = (float(eta), e)
    return best


def _write_artifacts(out: Path, state, noise, outer_trace) -> dict[str, Path]:
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "solution": write_matrix(out / "solution.csv", state.q_u.mean[:, None]),
        "covariance": write_matrix(out / "covariance.csv", state.q_u.covariance),
        "weights": write_table(out / "weights.csv", ["index", "E_w"], enumerate(state.E_w)),
        "trace": write_table(
            out / "trace.csv",
            ["iter", "E_lambda", "rel_change", "free_energy"],
            [(t.iter, t.E_lambda, t.rel_change, t.free_energy) for t in state.trace],
        ),
        "noise": write_table(
            out / "noise.csv",
            ["index", "y_exact", "y", "mask"],
            [(i, a, b, c) for i, (a, b, c) in enumerate(zip(noise.y_exact, noise.data, noise.mask))],
        ),
    }
    if outer_trace is not None:
        paths["outer_trace"] = outer_trace.to_csv(out / "outer_trace.csv")
    return paths


@dataclass(frozen=True)
class _Noise:
    y_exact: np.ndarray
    data: np.ndarray
    mask: np.ndarray


def run_experiment(config: ExperimentConfig, problem=None) -> ExperimentReport:
    """Corrupt, invert and score once per seed; failures are kept in the report."""
    problem = problem or build_problem(config.problem)
    out = Path(config.output_dir) if config.output_dir else None
    eta = config.baseline_eta
    records = []
    for seed in config.seeds:
        noise = corrupt(problem.exact_y, NoiseSpec(config.corruption_rate, seed))
        t0 = time.perf_counter()
        outer_trace = None
        try:
            if problem.is_linear:
                state = run_vb_linear(problem.model, noise.data, problem.smoothness, config.hyper, track_steps=False)
            else:
                state, outer_trace = run_vb_nonlinear(
                    problem.model, noise.data, problem.smoothness, config.hyper, config.outer
                )
        except (SolverError, FloatingPointError, ValueError) as exc:
            records.append(SeedRecord(seed, math.inf, math.nan, 0, time.perf_counter() - t0,
                                      failed=True, message=str(exc)))
            continue
        runtime = time.perf_counter() - t0
        rec = SeedRecord(
            seed,
            relative_error(state.q_u.mean, problem.exact_u),
            state.E_lambda,
            state.iter,
            runtime,
            outer_iterations=None if outer_trace is None else outer_trace.n_outer,
            converged=state.converged if outer_trace is None else outer_trace.converged,
        )
        if eta is not None and problem.is_linear:
            rec.baseline_e = relative_error(
                gaussian_baseline(problem.model, noise.data, problem.smoothness, eta), problem.exact_u
            )
        if out is not None:
            rec.artifacts = _write_artifacts(
                out / f"seed_{seed}", state, _Noise(problem.exact_y, noise.data, noise.mask), outer_trace
            )
        records.append(rec)

    # a failed seed counts as an infinitely bad error, so failures raise the median
    median_e = float(np.median([r.e for r in records]))
    lams = [r.E_lambda for r in records if not r.failed]
    median_lambda = float(np.median(lams)) if lams else math.nan
    report = ExperimentReport(config, records, median_e, median_lambda)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        report.report_path = out / "report.txt"
        report.report_path.write_text(report.summary())
    return report


@dataclass
class SweepRow:
    r: float
    lambda_median: float
    e_median: float
    report: ExperimentReport


def sweep(config: ExperimentConfig, r_values, problem=None) -> list[SweepRow]:
    """Run ``config`` at each corruption rate; writes ``sweep.csv`` when an output dir is set."""
    r_values = [float(r) for r in r_values]
    for r in r_values:
        NoiseSpec(r)
    problem = problem or build_problem(config.problem)
    root = Path(config.output_dir) if config.output_dir else None
    rows = []
    for r in r_values:
        sub = None if root is None else str(root / f"r_{r:.2f}")
        rep = run_experiment(replace(config, corruption_rate=r, output_dir=sub), problem)
        rows.append(SweepRow(r, rep.median_lambda, rep.median_e, rep))
    if root is not None:
        root.mkdir(parents=True, exist_ok=True)
        write_table(root / "sweep.csv", ["r", "lambda_median", "e_median"],
                    [(row.r, row.lambda_median, row.e_median) for row in rows])
    return rows
