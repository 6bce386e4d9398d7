"""The four heat-conduction benchmarks.

=================  ===========  =====  =====
name               kind           n      m
=================  ===========  =====  =====
cauchy             linear         80     41
flux               linear         50     51
robin_stationary   nonlinear     120     41
robin_transient    nonlinear     101    101
=================  ===========  =====  =====
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from .banded import BandedCholesky
from .fem2d import UnitSquareMesh
from .heat1d import FluxHeatSolver, RobinHeatSolver, linear_interpolation_matrix
from .models import (
    BenchmarkProblem,
    LinearModel,
    NonlinearModel,
    SmoothnessOperator,
    first_difference_operator,
)

PROBLEM_NAMES = ("cauchy", "flux", "robin_stationary", "robin_transient")

# coarse grid carrying the unknown on the top edge of the square
_EDGE_POINTS = 41


def cauchy_exact_field(x1, x2):
    return np.sin(np.pi * x1) * np.exp(np.pi * x2) + x1 + x2


def build_cauchy_problem(refine: int = 1, obs_nodes=None) -> BenchmarkProblem:
    """Recover the temperature on the top edge from temperatures on the vertical sides.

    The mesh has ``40 * refine`` squares per side.  The unknown holds 41
    equispaced top-edge values, prolonged linearly to the mesh.  By default
    the data are the nodal temperatures at ``x2 = k / 40`` (``k = 0..39``) on
    the left side followed by the same heights on the right side; pass
    ``obs_nodes`` (global node indices) to observe elsewhere.
    """
    if not isinstance(refine, (int, np.integer)) or refine < 1:
        raise ConfigurationError("refine must be an integer >= 1 to host 41 top-edge nodes")
    nx = (_EDGE_POINTS - 1) * refine
    mesh = UnitSquareMesh(nx)
    top = mesh.side_nodes("top")
    free = np.setdiff1d(np.arange(mesh.n_nodes), top)

    coarse = np.linspace(0.0, 1.0, _EDGE_POINTS)
    P = linear_interpolation_matrix(coarse, mesh.coords[top, 0])
    A = mesh.stiffness().tocsr()
    A_ff = A[free][:, free]
    A_fd = A[free][:, top]
    fac = BandedCholesky(A_ff, mesh.bandwidth)
    Y = np.zeros((mesh.n_nodes, _EDGE_POINTS))
    Y[top] = P
    Y[free] = -fac.solve(A_fd @ P)

    if obs_nodes is None:
        k = np.arange(_EDGE_POINTS - 1) * refine
        obs_nodes = np.concatenate([mesh.node(0, k), mesh.node(nx, k)])
    obs_nodes = np.asarray(obs_nodes, dtype=int)
    K = Y[obs_nodes]

    exact_u = cauchy_exact_field(coarse, 1.0)
    return BenchmarkProblem(
        name="cauchy",
        model=LinearModel(K),
        smoothness=first_difference_operator(_EDGE_POINTS),
        exact_u=exact_u,
        exact_y=K @ exact_u,
        mesh_meta={
            "nx": nx,
            "n_elements": mesh.n_elements,
            "unknown_x1": coarse,
            "obs_nodes": obs_nodes,
            "obs_coords": mesh.coords[obs_nodes],
            "side_flux": 0.0,
        },
    )


def build_flux_problem(n_intervals: int = 100, n_steps: int = 200, n_coarse: int = 51,
                       n_obs: int = 50) -> BenchmarkProblem:
    """Recover a boundary flux history from temperatures at the opposite end.

    The flux unknown sits on ``n_coarse`` equispaced times and is prolonged
    linearly to the ``n_steps`` backward-Euler grid; measurements are taken at
    ``t = k / n_obs``, ``k = 1..n_obs``.  The exact flux is a unit hat peaking
    at ``t = 0.5``.
    """
    if n_steps % n_obs:
        raise ConfigurationError("measurement times must fall on the time grid")
    solver = FluxHeatSolver(n_intervals, n_steps)
    coarse = np.linspace(0.0, 1.0, n_coarse)
    P = linear_interpolation_matrix(coarse, solver.times)
    response = solver.left_temperature(P)
    stride = n_steps // n_obs
    K = response[stride::stride]
    exact_u = 1.0 - np.abs(2.0 * coarse - 1.0)
    return BenchmarkProblem(
        name="flux",
        model=LinearModel(K),
        smoothness=first_difference_operator(n_coarse),
        exact_u=exact_u,
        exact_y=K @ exact_u,
        mesh_meta={
            "n_intervals": n_intervals,
            "n_steps": n_steps,
            "unknown_t": coarse,
            "obs_t": solver.times[stride::stride],
            "left_flux": 0.0,
        },
    )


class RobinSquareModel:
    """Stationary heat on the unit square with a Robin top edge.

    ``dy/dn = flux`` on the bottom and vertical sides and ``dy/dn + u y = 0``
    on the top edge, with ``u`` given at the 41 top nodes.
    """

    def __init__(self, mesh: UnitSquareMesh, obs_nodes: np.ndarray, flux: float = 1.0):
        self.mesh = mesh
        self.obs_nodes = np.asarray(obs_nodes, dtype=int)
        self.A = mesh.stiffness()
        self.f = mesh.neumann_load({s: flux for s in ("bottom", "left", "right")})
        self.m = mesh.nx + 1
        self.n = len(self.obs_nodes)

    def _solve(self, u):
        u = np.asarray(u, dtype=float)
        fac = BandedCholesky(self.A + self.mesh.robin_mass("top", u), self.mesh.bandwidth)
        return fac, fac.solve(self.f)

    def state(self, u) -> np.ndarray:
        return self._solve(u)[1]

    def evaluate(self, u) -> np.ndarray:
        return self.state(u)[self.obs_nodes]

    def jacobian(self, u) -> np.ndarray:
        fac, y = self._solve(u)
        B = self.mesh.robin_mass_derivative("top", y)
        return -fac.solve(B)[self.obs_nodes]

    def as_model(self) -> NonlinearModel:
        return NonlinearModel(self.evaluate, self.jacobian, m=self.m, n=self.n)


def _robin_obs_nodes(mesh: UnitSquareMesh) -> np.ndarray:
    # walk left side downwards, bottom rightwards, right side upwards; each
    # edge drops its starting node so shared corners appear once
    nx = mesh.nx
    j = np.arange(nx)
    left = mesh.node(0, nx - 1 - j)
    bottom = mesh.node(j + 1, 0)
    right = mesh.node(nx, j + 1)
    return np.concatenate([left, bottom, right])


def build_robin_stationary(flux: float = 1.0, obs_nodes=None) -> BenchmarkProblem:
    """Recover a heat-transfer coefficient on the top edge from side/bottom temperatures."""
    mesh = UnitSquareMesh(_EDGE_POINTS - 1)
    if obs_nodes is None:
        obs_nodes = _robin_obs_nodes(mesh)
    core = RobinSquareModel(mesh, obs_nodes, flux)
    x1 = mesh.coords[mesh.side_nodes("top"), 0]
    exact_u = 1.0 + np.sin(np.pi * x1)
    model = core.as_model()
    return BenchmarkProblem(
        name="robin_stationary",
        model=model,
        smoothness=first_difference_operator(_EDGE_POINTS),
        exact_u=exact_u,
        exact_y=model.evaluate(exact_u),
        mesh_meta={
            "nx": mesh.nx,
            "n_elements": mesh.n_elements,
            "unknown_x1": x1,
            "obs_nodes": core.obs_nodes,
            "obs_coords": mesh.coords[core.obs_nodes],
            "side_flux": flux,
        },
    )


def build_robin_transient(flux: float = 1.0, n_intervals: int = 100,
                          n_steps: int = 100) -> BenchmarkProblem:
    """Recover a time-dependent heat-transfer coefficient at ``x = 1``.

    Data are the temperatures at ``x = 0`` on every time node, ``t = 0``
    included.  The exact coefficient is ``1 + 0.5`` on ``[0.3, 0.7]``.
    """
    solver = RobinHeatSolver(n_intervals, n_steps, flux=flux)
    k = np.arange(n_steps + 1)
    t = solver.times
    # integer test keeps the closed interval exact on the grid
    inside = (10 * k >= 3 * n_steps) & (10 * k <= 7 * n_steps)
    exact_u = 1.0 + 0.5 * inside
    model = NonlinearModel(solver.evaluate, solver.jacobian, m=n_steps + 1, n=n_steps + 1)
    return BenchmarkProblem(
        name="robin_transient",
        model=model,
        smoothness=first_difference_operator(n_steps + 1),
        exact_u=exact_u,
        exact_y=model.evaluate(exact_u),
        mesh_meta={
            "n_intervals": n_intervals,
            "n_steps": n_steps,
            "unknown_t": t,
            "obs_t": t,
            "left_flux": flux,
        },
    )


def build_problem(name: str) -> BenchmarkProblem:
    builders = {
        "cauchy": build_cauchy_problem,
        "flux": build_flux_problem,
        "robin_stationary": build_robin_stationary,
        "robin_transient": build_robin_transient,
    }
    if name not in builders:
        raise ConfigurationError(f"unknown problem {name!r}; expected one of {PROBLEM_NAMES}")
    return builders[name]()


def export_operators(problem: BenchmarkProblem, out_dir) -> dict[str, Path]:
    """Write K (the Jacobian at ``exact_u`` for nonlinear models), L, exact_u, exact_y as CSV."""
    from ..csvio import write_matrix

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    K = problem.model.jacobian(problem.exact_u)
    paths = {
        "K": out / "K.csv",
        "L": out / "L.csv",
        "exact_u": out / "exact_u.csv",
        "exact_y": out / "exact_y.csv",
    }
    write_matrix(paths["K"], K)
    write_matrix(paths["L"], problem.smoothness.matrix)
    write_matrix(paths["exact_u"], problem.exact_u[:, None])
    write_matrix(paths["exact_y"], problem.exact_y[:, None])
    return paths


def load_linear_problem(in_dir, name: str = "custom") -> BenchmarkProblem:
    """Inverse of ``export_operators`` for linear problems."""
    from ..csvio import read_matrix

    d = Path(in_dir)
    K = read_matrix(d / "K.csv")
    return BenchmarkProblem(
        name=name,
        model=LinearModel(K),
        smoothness=SmoothnessOperator(read_matrix(d / "L.csv")),
        exact_u=read_matrix(d / "exact_u.csv").ravel(),
        exact_y=read_matrix(d / "exact_y.csv").ravel(),
        mesh_meta={"source": str(d)},
    )
