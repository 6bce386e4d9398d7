"""Recursive linearization around the variational solver for nonlinear models.

At each outer step the forward map is replaced by its first-order Taylor
expansion at the current posterior mean ``u~``::

    K(u) ~ K(u~) + J (u - u~) = J u + offset

and the linear solver is run on the shifted data ``y - offset``.  The weight
and regularization factors carry over from one outer step to the next.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import SolverError
from .forward_models.models import LinearModel, NonlinearModel, SmoothnessOperator
from .vb_solver import HyperConfig, VBState, run_vb_linear

__all__ = [
    "LinearizedModel",
    "OuterRecord",
    "OuterTrace",
    "OuterConfig",
    "linearize",
    "run_vb_nonlinear",
]

# surrogate counted as exact when it matches the model to roundoff at the new mode
_AFFINE_RTOL = 1e-12


@dataclass(frozen=True)
class LinearizedModel:
    matrix: np.ndarray
    offset: np.ndarray
    expansion_point: np.ndarray
    # K(u~), kept so callers need not re-evaluate the model
    value: np.ndarray

    def predicted(self, u) -> np.ndarray:
        return self.matrix @ np.asarray(u, dtype=float) + self.offset


def _as_nonlinear(model):
    if isinstance(model, LinearModel):
        return model.as_nonlinear()
    return model


def linearize(model: NonlinearModel, u_tilde, value=None) -> LinearizedModel:
    """First-order Taylor expansion of ``model`` at ``u_tilde``.

    ``value`` may carry a precomputed ``K(u_tilde)``.
    """
    model = _as_nonlinear(model)
    u_tilde = np.asarray(u_tilde, dtype=float).copy()
    try:
        Ku = np.asarray(model.evaluate(u_tilde), dtype=float) if value is None else np.asarray(value, dtype=float)
        J = np.asarray(model.jacobian(u_tilde), dtype=float)
    except SolverError as exc:
        raise SolverError(f"forward solve failed at expansion point: {exc}") from exc
    return LinearizedModel(J, Ku - J @ u_tilde, u_tilde, Ku)


@dataclass(frozen=True)
class OuterConfig:
    u0: np.ndarray | None = None
    outer_tol: float = 1.0e-5
    max_outer: int = 20
    inner_max_iter: int = 50
    loose_inner: bool = False
    loose_tol: float = 1.0e-3
    clamp_floor: float | None = 1.0e-6
    max_clamped: int = 5


@dataclass
class OuterRecord:
    outer_iter: int
    expansion_point: np.ndarray
    rel_change: float
    inner_iters: int
    E_lambda: float
    inner_converged: bool
    clamped: bool


@dataclass
class OuterTrace:
    records: list[OuterRecord] = field(default_factory=list)
    converged: bool = False
    clamp_count: int = 0

    @property
    def n_outer(self) -> int:
        return len(self.records)

    def to_csv(self, path) -> Path:
        from .csvio import write_table

        rows = [(r.outer_iter, r.rel_change, r.inner_iters, r.E_lambda) for r in self.records]
        return write_table(path, ["outer_iter", "rel_change", "inner_iters", "E_lambda"], rows)


def run_vb_nonlinear(
    model,
    y,
    L,
    config: HyperConfig | None = None,
    outer: OuterConfig | None = None,
) -> tuple[VBState, OuterTrace]:
    """Alternate linearization at the current mean with a full linear VB solve.

    Stops when the mean's relative change between outer steps drops to
    ``outer_tol``, or when the affine surrogate already reproduces the model
    at the new mean (so relinearizing could not change the problem).  Trial
    means below ``clamp_floor`` are lifted to it before the next forward
    solve; more than ``max_clamped`` clamped steps abort the run.
    """
    config = config or HyperConfig()
    outer = outer or OuterConfig()
    model = _as_nonlinear(model)
    y = np.asarray(y, dtype=float)
    if not isinstance(L, SmoothnessOperator):
        L = SmoothnessOperator(np.asarray(L, dtype=float))
    u = np.ones(model.m) if outer.u0 is None else np.asarray(outer.u0, dtype=float).copy()

    trace = OuterTrace()
    state = None
    value = None
    for k in range(1, outer.max_outer + 1):
        lin = linearize(model, u, value)
        tol = outer.loose_tol if (outer.loose_inner and k <= 2) else config.tol
        inner_cfg = replace(config, tol=tol, max_iter=min(config.max_iter, outer.inner_max_iter))
        kwargs = {}
        if state is not None:
            kwargs = {"init_w": state.q_w, "init_lambda": state.q_lambda}
        state = run_vb_linear(lin.matrix, y - lin.offset, L, inner_cfg, track_steps=False, **kwargs)

        u_raw = state.q_u.mean
        u_new = u_raw.copy()
        clamped = False
        if outer.clamp_floor is not None and np.any(u_new < outer.clamp_floor):
            u_new = np.maximum(u_new, outer.clamp_floor)
            clamped = True
            trace.clamp_count += 1
            if trace.clamp_count > outer.max_clamped:
                raise SolverError(
                    f"outer iteration {k}: trial mode clamped at {outer.clamp_floor} "
                    f"in {trace.clamp_count} outer iterations"
                )
        # measured on the unclamped mean so a mode pinned at the floor never looks converged
        nu = float(np.linalg.norm(u_raw))
        rel = float(np.linalg.norm(u_raw - u)) / nu if nu > 0 else math.inf
        trace.records.append(
            OuterRecord(k, lin.expansion_point, rel, state.iter, state.E_lambda, state.converged, clamped)
        )
        value = np.asarray(model.evaluate(u_new), dtype=float)
        mismatch = float(np.linalg.norm(value - lin.predicted(u_new)))
        u = u_new
        if clamped:
            continue
        if rel <= outer.outer_tol or mismatch <= _AFFINE_RTOL * max(float(np.linalg.norm(value)), 1e-300):
            trace.converged = True
            break
    return state, trace
