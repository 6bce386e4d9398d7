"""Command-line front end: ``run``, ``sweep``, ``export-operators`` and ``selftest``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..forward_models.problems import PROBLEM_NAMES, build_problem, export_operators
from .experiment import DEFAULT_ETA, ExperimentConfig, run_experiment, sweep


def parse_seeds(text: str) -> tuple[int, ...]:
    """Accept ``"0,3,7"`` or an inclusive range ``"0-9"``."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    return tuple(seeds)


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _config(args, r_default=0.5) -> ExperimentConfig:
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    if args.problem:
        base["problem"] = args.problem
    if "problem" not in base:
        raise SystemExit("a problem is required (--problem or config file)")
    if args.seeds:
        base["seeds"] = list(parse_seeds(args.seeds))
    if args.eta is not None:
        base["baseline_eta"] = args.eta
    elif base.get("baseline_eta") is None and base["problem"] in DEFAULT_ETA:
        base["baseline_eta"] = DEFAULT_ETA[base["problem"]]
    if args.out:
        base["output_dir"] = args.out
    base.setdefault("corruption_rate", r_default)
    return ExperimentConfig.from_dict(base)


def cmd_run(args) -> int:
    config = _config(args)
    if args.r is not None:
        rs = parse_floats(args.r)
        if len(rs) != 1:
            raise SystemExit("run takes a single --r value; use sweep for several")
        config = replace(config, corruption_rate=rs[0])
    report = run_experiment(config)
    sys.stdout.write(report.summary())
    return 0


def cmd_sweep(args) -> int:
    config = _config(args)
    rs = parse_floats(args.r) if args.r else [round(0.1 * k, 1) for k in range(1, 10)]
    rows = sweep(config, rs)
    print("r,lambda_median,e_median")
    for row in rows:
        print(f"{row.r:g},{row.lambda_median:.6g},{row.e_median:.6g}")
    return 0


def cmd_export(args) -> int:
    if not args.problem or not args.out:
        raise SystemExit("export-operators needs --problem and --out")
    paths = export_operators(build_problem(args.problem), args.out)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def selftest_checks():
    """Fast consistency checks; yields ``(name, passed, detail)``."""
    from scipy import integrate

    from ..distributions import StudentTParams, digamma, gamma_density, student_t_density
    from ..forward_models.models import finite_diff_jacobian
    from ..noise_metrics import NoiseSpec, corrupt
    from ..vb_solver import run_vb_linear

    d = max(abs(digamma(s + 1) - digamma(s) - 1 / s) for s in (0.5, 1.0, 3.0))
    yield "digamma recurrence", d < 1e-12, f"max defect {d:.2e}"

    p = StudentTParams(4.0, 1.0)
    g = p.to_gamma()

    def mix(w):
        return math.sqrt(w / (2 * math.pi)) * math.exp(-2.0 * w) * float(gamma_density(w, g))

    val = integrate.quad(mix, 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    rel = abs(val - student_t_density(2.0, p)) / val
    yield "scale-mixture identity", rel < 1e-6, f"relative gap {rel:.2e}"

    prob = build_problem("robin_transient")
    u = prob.exact_u
    J = prob.model.jacobian(u)
    F = finite_diff_jacobian(prob.model, u, 1e-5)
    rel = np.linalg.norm(J - F) / np.linalg.norm(F)
    yield "robin_transient Jacobian vs finite differences", rel < 1e-4, f"relative Frobenius {rel:.2e}"

    prob = build_problem("cauchy")
    noise = corrupt(prob.exact_y, NoiseSpec(0.3, 0))
    state = run_vb_linear(prob.model, noise.data, prob.smoothness)
    worst = max(max(np.diff(t.step_energies), default=-math.inf) for t in state.trace)
    prev = [t.step_energies[-1] for t in state.trace]
    worst = max(worst, max(np.diff(prev), default=-math.inf))
    yield "free-energy non-increase", worst <= 1e-8, f"largest increase {worst:.2e}"

    same = np.array_equal(corrupt(prob.exact_y, NoiseSpec(0.5, 7)).data,
                          corrupt(prob.exact_y, NoiseSpec(0.5, 7)).data)
    yield "deterministic corruption", same, ""


def cmd_selftest(args) -> int:
    ok = True
    for name, passed, detail in selftest_checks():
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip())
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustvb-bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config; flags override its fields")
        p.add_argument("--problem", choices=PROBLEM_NAMES)
        p.add_argument("--r", help="corruption rate (comma list for sweep)")
        p.add_argument("--seeds", help="comma list or inclusive range such as 0-9")
        p.add_argument("--eta", type=float, help="Gaussian-baseline regularization weight")
        p.add_argument("--out", help="output directory for CSV artifacts and report.txt")

    common(sub.add_parser("run", help="one experiment at a single corruption rate"))
    common(sub.add_parser("sweep", help="median e and E[lambda] over several corruption rates"))
    export = sub.add_parser("export-operators", help="write K, L, exact_u, exact_y as CSV")
    export.add_argument("--problem", choices=PROBLEM_NAMES)
    export.add_argument("--out")
    sub.add_parser("selftest", help="quick numerical self-checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "sweep": cmd_sweep, "export-operators": cmd_export, "selftest": cmd_selftest}
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
