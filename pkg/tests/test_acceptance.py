"""End-to-end acceptance criteria, each asserted at its stated tolerance.

Each criterion prints a one-line PASS/FAIL verdict, repeated in the terminal
summary.  Medians are over seeds 0..9, and a seed whose solver aborts counts
as an infinite error.
"""
import math
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy import integrate

from conftest import record_criterion
from robustvb.bench import ExperimentConfig, gaussian_baseline, run_experiment
from robustvb.distributions import GammaParams, StudentTParams, digamma, gamma_density, student_t_density
from robustvb.forward_models import build_problem, finite_diff_jacobian, first_difference_operator
from robustvb.noise_metrics import NoiseSpec, corrupt, relative_error, weight_separation
from robustvb.vb_solver import (
    GaussianPosterior,
    expected_residual_sq,
    expected_smoothness,
    run_vb_linear,
    update_t_params,
)

pytestmark = pytest.mark.acceptance

SEEDS = tuple(range(10))
R_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))

TABLE_E = {
    "cauchy": dict(zip(R_GRID, [2.33e-4, 3.67e-4, 3.65e-4, 3.67e-4, 1.59e-3, 2.49e-3, 2.49e-3, 2.49e-3, 2.53e-3])),
    "flux": dict(zip(R_GRID[:8], [5.51e-3, 6.73e-3, 8.17e-3, 8.28e-3, 9.06e-3, 9.41e-3, 1.79e-2, 1.79e-2])),
    "robin_stationary": dict(zip(R_GRID, [1.30e-3, 1.72e-3, 1.71e-3, 1.71e-3, 1.70e-3, 1.70e-3, 1.69e-3, 1.76e-3, 2.27e-3])),
}


@lru_cache(maxsize=None)
def problem(name):
    return build_problem(name)


@lru_cache(maxsize=None)
def table(name):
    """Per-rate experiment reports plus the wall time of the whole sweep."""
    p = problem(name)
    rates = tuple(TABLE_E[name]) if name in TABLE_E else R_GRID
    t0 = time.perf_counter()
    reports = {r: run_experiment(ExperimentConfig(name, r, SEEDS), p) for r in rates}
    return reports, time.perf_counter() - t0


def table_rows(reports, bound):
    rows, ok = [], True
    for r, rep in reports.items():
        good = rep.median_e <= bound(r)
        ok &= good
        rows.append(f"r={r:g} e={rep.median_e:.3g}{'' if good else '>' + format(bound(r), '.3g')}")
    return ok, rows


def test_criterion_1_cauchy_table():
    reports, wall = table("cauchy")
    ok, rows = table_rows(reports, lambda r: 5 * TABLE_E["cauchy"][r])
    fast = wall < 60.0
    passed = record_criterion(1, "cauchy table", ok and fast, f"{wall:.1f}s; " + ", ".join(rows))
    assert passed


def test_criterion_2_flux_table():
    reports, _ = table("flux")
    ok, rows = table_rows(reports, lambda r: 5 * TABLE_E["flux"][r])
    ratio = reports[0.8].median_e / reports[0.1].median_e
    mild = ratio <= 10.0
    passed = record_criterion(2, "flux table", ok and mild, f"e(0.8)/e(0.1)={ratio:.3g}; " + ", ".join(rows))
    assert passed


def test_criterion_3_robin_stationary_table():
    reports, _ = table("robin_stationary")
    ok, rows = table_rows(reports, lambda r: 5 * TABLE_E["robin_stationary"][r])
    outers = [rec.outer_iterations for rep in reports.values() for rec in rep.records if not rec.failed]
    failed = sum(len(rep.failed_seeds) for rep in reports.values())
    quick = failed == 0 and max(outers) <= 8
    passed = record_criterion(
        3, "robin_stationary table", ok and quick,
        f"max outer={max(outers)}, aborted runs={failed}; " + ", ".join(rows))
    assert passed


def test_criterion_4_robin_transient_table():
    reports, _ = table("robin_transient")
    ok, rows = table_rows(reports, lambda r: 0.1)
    passed = record_criterion(4, "robin_transient table", ok, ", ".join(rows))
    assert passed


def test_criterion_5_robustness_contrast():
    p = problem("cauchy")
    ratios = []
    for seed in SEEDS:
        y = corrupt(p.exact_y, NoiseSpec(0.5, seed)).data
        e_t = relative_error(run_vb_linear(p.model, y, p.smoothness, track_steps=False).q_u.mean, p.exact_u)
        e_g = relative_error(gaussian_baseline(p.model, y, p.smoothness, 4.64), p.exact_u)
        ratios.append(e_g / e_t)
    passed = record_criterion(
        5, "t model vs Gaussian baseline", min(ratios) >= 5.0,
        "baseline/t error ratios " + ", ".join(f"{x:.3g}" for x in ratios))
    assert passed


def _eventually_monotone(values, start=3):
    d = np.diff(values[start - 1:])
    slack = 1e-12 * np.max(np.abs(values))
    return bool(np.all(d <= slack) or np.all(d >= -slack))


def test_criterion_6_convergence_speed():
    p = problem("cauchy")
    iters, monotone = [], []
    for seed in SEEDS:
        y = corrupt(p.exact_y, NoiseSpec(0.5, seed)).data
        st = run_vb_linear(p.model, y, p.smoothness, track_steps=False)
        iters.append(st.iter if st.converged else math.inf)
        monotone.append(_eventually_monotone([t.E_lambda for t in st.trace]))
    passed = record_criterion(
        6, "convergence speed", max(iters) <= 30 and all(monotone),
        f"iterations {iters}; lambda monotone after iteration 3: {monotone}")
    assert passed


def _property_checks():
    out = {}
    p = problem("cauchy")

    worst, pivots = -math.inf, []
    for r in (0.0, 0.3, 0.5):
        y = corrupt(p.exact_y, NoiseSpec(r, 0)).data
        st = run_vb_linear(p.model, y, p.smoothness,
                           callback=lambda s: pivots.append(np.linalg.cholesky(s.q_u.covariance).diagonal().min()))
        energies = [e for rec in st.trace for e in rec.step_energies]
        worst = max(worst, float(np.max(np.diff(energies))))
    out["free energy non-increasing"] = (worst <= 1e-8, f"max step increase {worst:.2e}")
    out["covariance SPD"] = (min(pivots) > 0, f"min Cholesky pivot {min(pivots):.2e}")

    rng = np.random.default_rng(1)
    gap = 0.0
    for _ in range(20):
        nu, sigma = rng.uniform(1, 10), rng.uniform(0.1, 10)
        z = rng.normal(scale=2 * sigma)
        t = StudentTParams(nu, sigma)
        g = t.to_gamma()
        mix = integrate.quad(
            lambda w: math.sqrt(w / (2 * math.pi)) * math.exp(-0.5 * w * z * z) * gamma_density(w, g),
            0, np.inf, epsabs=0, epsrel=1e-11, limit=200)[0]
        gap = max(gap, abs(mix - student_t_density(z, t)) / mix)
    out["scale mixture"] = (gap < 1e-6, f"max relative gap {gap:.2e}")

    jac = 0.0
    for name in ("robin_stationary", "robin_transient"):
        q = problem(name)
        J, F = q.model.jacobian(q.exact_u), finite_diff_jacobian(q.model, q.exact_u, 1e-5)
        jac = max(jac, np.linalg.norm(J - F) / np.linalg.norm(F))
    out["Jacobians"] = (jac < 1e-4, f"max relative Frobenius {jac:.2e}")

    K = rng.normal(size=(5, 3))
    y = rng.normal(size=5)
    B = rng.normal(size=(3, 3))
    q_u = GaussianPosterior(rng.normal(size=3), B @ B.T + 0.1 * np.eye(3))
    U = rng.multivariate_normal(q_u.mean, q_u.covariance, size=1_000_000)
    sq = (U @ K.T - y) ** 2
    z_res = np.max(np.abs(sq.mean(0) - expected_residual_sq(K, y, q_u)) / (sq.std(0) / 1e3))
    L = first_difference_operator(3)
    sm = np.sum((U @ L.matrix.T) ** 2, axis=1)
    z_sm = abs(sm.mean() - expected_smoothness(L, q_u)) / (sm.std() / 1e3)
    out["Gaussian moments"] = (max(z_res, z_sm) < 3, f"max |z| {max(z_res, z_sm):.2f}")

    w = GammaParams(rng.uniform(0.6, 4, 40), rng.uniform(0.01, 100, 40))
    fit = update_t_params(w)
    a, b = float(fit.params.shape), float(fit.params.rate)
    res = max(abs(math.log(b) - digamma(a) + float(np.mean(w.mean_log))),
              abs(a / b - float(np.mean(w.mean))) / (a / b))
    out["t-parameter plug-back"] = (res < 1e-10, f"residual {res:.2e}")

    noise = corrupt(p.exact_y, NoiseSpec(0.3, 0))
    st = run_vb_linear(p.model, noise.data, p.smoothness, track_steps=False)
    sep = weight_separation(st.E_w, noise.mask)
    out["weight separation"] = (sep.separated, f"min clean {sep.min_clean:.3g} > max corrupt {sep.max_corrupt:.3g}")
    return out


def test_criterion_7_property_suite(tmp_path):
    t0 = time.perf_counter()
    checks = _property_checks()
    blobs = []
    for name in ("a", "b"):
        d = tmp_path / name
        for prob in ("cauchy", "robin_stationary"):
            run_experiment(ExperimentConfig(prob, 0.4, (0, 1), baseline_eta=1.0, output_dir=str(d / prob)), problem(prob))
        blobs.append({f.relative_to(d): f.read_bytes() for f in sorted(d.rglob("*.csv"))})
    checks["byte-identical reruns"] = (blobs[0] == blobs[1], f"{len(blobs[0])} CSV files compared")
    failed = [k for k, (ok, _) in checks.items() if not ok]
    detail = "; ".join(f"{k}: {d}" for k, (_, d) in checks.items())
    passed = record_criterion(7, "property suite", not failed,
                              f"{time.perf_counter() - t0:.1f}s; " + detail)
    assert passed, failed
