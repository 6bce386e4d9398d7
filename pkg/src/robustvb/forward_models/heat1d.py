"""1D transient heat conduction on (0, 1): P1 elements in space, backward Euler in time.

Node 0 is the left end ``x = 0`` and node ``N`` the right end ``x = 1``.
Boundary conditions enter the weak form through the outward normal
derivative, so a prescribed ``dy/dn = q`` at node ``b`` adds ``q`` to the
load at ``b``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sparse

from .banded import BandedCholesky, to_upper_banded


def interval_matrices(n_intervals: int):
    """Stiffness and consistent mass matrices on a uniform grid."""
    h = 1.0 / n_intervals
    n = n_intervals + 1
    main = np.full(n, 2.0)
    main[[0, -1]] = 1.0
    off = np.ones(n - 1)
    A = sparse.diags([-off, main, -off], [-1, 0, 1]) / h
    M = sparse.diags([off, 2.0 * main, off], [-1, 0, 1]) * (h / 6.0)
    return A.tocsr(), M.tocsr()


def linear_interpolation_matrix(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    """Matrix mapping values at sorted ``coarse`` nodes to their P1 interpolant at ``fine``."""
    P = np.zeros((len(fine), len(coarse)))
    idx = np.clip(np.searchsorted(coarse, fine, side="right") - 1, 0, len(coarse) - 2)
    t = (fine - coarse[idx]) / (coarse[idx + 1] - coarse[idx])
    P[np.arange(len(fine)), idx] = 1.0 - t
    P[np.arange(len(fine)), idx + 1] = t
    return P


class FluxHeatSolver:
    """Linear map from the right-end flux history to temperatures.

    Flux values live on the time grid ``t_k = k * dt`` (``k = 0..n_steps``);
    step ``k`` uses the flux at ``t_k`` (implicit), so ``flux[0]`` is inert.
    """

    def __init__(self, n_intervals: int = 100, n_steps: int = 200, t_final: float = 1.0):
        self.n_intervals = n_intervals
        self.n_steps = n_steps
        self.dt = t_final / n_steps
        self.times = np.linspace(0.0, t_final, n_steps + 1)
        self.A, self.M = interval_matrices(n_intervals)
        self._step = BandedCholesky(self.M + self.dt * self.A, 1)

    def left_temperature(self, flux: np.ndarray, left_flux: float = 0.0) -> np.ndarray:
        """Temperature at ``x = 0`` for each time node; ``flux`` may carry extra columns."""
        flux = np.asarray(flux, dtype=float)
        extra = flux.shape[1:]
        y = np.zeros((self.n_intervals + 1,) + extra)
        out = np.zeros((self.n_steps + 1,) + extra)
        for k in range(1, self.n_steps + 1):
            rhs = self.M @ y
            rhs[-1] += self.dt * flux[k]
            rhs[0] += self.dt * left_flux
            y = self._step.solve(rhs)
            out[k] = y[0]
        return out


class RobinHeatSolver:
    """Temperature at ``x = 0`` driven by a constant flux there and cooled by a
    time-dependent Robin coefficient at ``x = 1``.

    As with ``FluxHeatSolver``, step ``k`` is implicit in ``coef[k]`` and
    ``coef[0]`` never enters the discrete model.
    """

    def __init__(self, n_intervals: int = 100, n_steps: int = 100, t_final: float = 1.0,
                 flux: float = 1.0):
        self.n_intervals = n_intervals
        self.n_steps = n_steps
        self.dt = t_final / n_steps
        self.flux = flux
        self.times = np.linspace(0.0, t_final, n_steps + 1)
        self.A, self.M = interval_matrices(n_intervals)
        self._base = to_upper_banded(self.M + self.dt * self.A, 1)

    def _factor(self, c: float) -> BandedCholesky:
        ab = self._base.copy()
        ab[-1, -1] += self.dt * c
        return BandedCholesky.from_banded(ab)

    def states(self, coef: np.ndarray) -> np.ndarray:
        """All nodal temperatures, shape ``(n_steps + 1, n_intervals + 1)``."""
        ys = np.zeros((self.n_steps + 1, self.n_intervals + 1))
        for k in range(1, self.n_steps + 1):
            rhs = self.M @ ys[k - 1]
            rhs[0] += self.dt * self.flux
            ys[k] = self._factor(coef[k]).solve(rhs)
        return ys

    def evaluate(self, coef: np.ndarray) -> np.ndarray:
        return self.states(coef)[:, 0]

    def jacobian(self, coef: np.ndarray) -> np.ndarray:
        """Forward sensitivities of ``evaluate`` with respect to every ``coef[j]``."""
        m = self.n_steps + 1
        y = np.zeros(self.n_intervals + 1)
        S = np.zeros((self.n_intervals + 1, m))
        J = np.zeros((m, m))
        for k in range(1, self.n_steps + 1):
            fac = self._factor(coef[k])
            rhs = self.M @ y
            rhs[0] += self.dt * self.flux
            y = fac.solve(rhs)
            srhs = self.M @ S
            srhs[-1, k] -= self.dt * y[-1]
            S = fac.solve(srhs)
            J[k] = S[0]
        return J
