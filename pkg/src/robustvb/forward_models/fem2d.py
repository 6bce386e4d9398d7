"""Piecewise-linear finite elements for the Laplace equation on the unit square.

The mesh is a structured ``nx x nx`` grid of squares, each cut into two
triangles along the diagonal from its lower-left to its upper-right corner.
Node ``(i, j)`` sits at ``(i / nx, j / nx)`` and has global index
``j * (nx + 1) + i``, so the top edge holds the last ``nx + 1`` indices and
the natural ordering has half-bandwidth ``nx + 2``.
"""
from __future__ import annotations

from typing import Callable, Mapping

import numpy as np
import scipy.sparse as sparse

from ..errors import ConfigurationError
from .banded import BandedCholesky

SIDES = ("bottom", "right", "top", "left")
_OUTWARD = {
    "bottom": (0.0, -1.0),
    "right": (1.0, 0.0),
    "top": (0.0, 1.0),
    "left": (-1.0, 0.0),
}
_GAUSS = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


class UnitSquareMesh:
    def __init__(self, nx: int):
        if nx < 1:
            raise ConfigurationError("mesh needs at least one square per side")
        self.nx = nx
        self.h = 1.0 / nx
        g = np.linspace(0.0, 1.0, nx + 1)
        X1, X2 = np.meshgrid(g, g)
        self.coords = np.column_stack([X1.ravel(), X2.ravel()])
        self.n_nodes = (nx + 1) ** 2

        tris = []
        for j in range(nx):
            for i in range(nx):
                n00 = self.node(i, j)
                n10, n01, n11 = n00 + 1, n00 + nx + 1, n00 + nx + 2
                tris.append((n00, n10, n11))
                tris.append((n00, n11, n01))
        self.triangles = np.array(tris, dtype=int)

    def node(self, i: int, j: int) -> int:
        return j * (self.nx + 1) + i

    @property
    def n_elements(self) -> int:
        return len(self.triangles)

    @property
    def bandwidth(self) -> int:
        return self.nx + 2

    def side_nodes(self, side: str) -> np.ndarray:
        """Nodes along a side, ordered by increasing free coordinate."""
        k = np.arange(self.nx + 1)
        if side == "bottom":
            return self.node(k, 0)
        if side == "top":
            return self.node(k, self.nx)
        if side == "left":
            return self.node(0, k)
        if side == "right":
            return self.node(self.nx, k)
        raise ConfigurationError(f"unknown side {side!r}")

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(np.concatenate([self.side_nodes(s) for s in SIDES]))

    def stiffness(self) -> sparse.csr_matrix:
        xy = self.coords[self.triangles]  # (E, 3, 2)
        # gradients of barycentric coordinates via the edge vectors
        d = np.stack(
            [xy[:, 2] - xy[:, 1], xy[:, 0] - xy[:, 2], xy[:, 1] - xy[:, 0]], axis=1
        )
        area2 = d[:, 2, 0] * d[:, 1, 1] - d[:, 2, 1] * d[:, 1, 0]
        area2 = np.abs(area2)
        local = np.einsum("eak,ebk->eab", d, d) / (2.0 * area2[:, None, None])
        rows = np.repeat(self.triangles, 3, axis=1).ravel()
        cols = np.tile(self.triangles, (1, 3)).ravel()
        return sparse.csr_matrix(
            (local.ravel(), (rows, cols)), shape=(self.n_nodes, self.n_nodes)
        )

    def neumann_load(self, flux: Mapping[str, Callable | float]) -> np.ndarray:
        """Assemble ``int g * phi_i ds`` with two-point Gauss quadrature per segment."""
        f = np.zeros(self.n_nodes)
        for side, g in flux.items():
            nodes = self.side_nodes(side)
            a, b = self.coords[nodes[:-1]], self.coords[nodes[1:]]
            for t in _GAUSS:
                p = a + t * (b - a)
                gv = g(p[:, 0], p[:, 1]) if callable(g) else np.full(len(p), float(g))
                np.add.at(f, nodes[:-1], 0.5 * self.h * gv * (1 - t))
                np.add.at(f, nodes[1:], 0.5 * self.h * gv * t)
        return f

    def robin_mass(self, side: str, coef: np.ndarray) -> sparse.csr_matrix:
        """``int u * phi_i * phi_j ds`` for a P1 coefficient given at the side's nodes."""
        nodes = self.side_nodes(side)
        ua, ub = coef[:-1], coef[1:]
        a, b = nodes[:-1], nodes[1:]
        c = self.h / 12.0
        rows = np.concatenate([a, b, a, b])
        cols = np.concatenate([a, b, b, a])
        vals = np.concatenate(
            [c * (3 * ua + ub), c * (ua + 3 * ub), c * (ua + ub), c * (ua + ub)]
        )
        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.n_nodes, self.n_nodes))

    def robin_mass_derivative(self, side: str, y: np.ndarray) -> np.ndarray:
        """Columns ``d(M(u) y)/du_k`` for each node ``k`` of the side."""
        nodes = self.side_nodes(side)
        ya, yb = y[nodes[:-1]], y[nodes[1:]]
        c = self.h / 12.0
        B = np.zeros((self.n_nodes, len(nodes)))
        seg = np.arange(len(nodes) - 1)
        np.add.at(B, (nodes[:-1], seg), c * (3 * ya + yb))
        np.add.at(B, (nodes[1:], seg), c * (ya + yb))
        np.add.at(B, (nodes[:-1], seg + 1), c * (ya + yb))
        np.add.at(B, (nodes[1:], seg + 1), c * (ya + 3 * yb))
        return B

    def outward_normal(self, side: str):
        return _OUTWARD[side]


def solve_laplace(
    mesh: UnitSquareMesh,
    dirichlet_nodes=None,
    dirichlet_values=None,
    neumann: Mapping[str, Callable | float] | None = None,
    robin: tuple[str, np.ndarray] | None = None,
) -> np.ndarray:
    """Solve ``-Laplace(y) = 0`` with mixed boundary data; returns all nodal values.

    Sides absent from ``neumann`` and not constrained otherwise carry a
    homogeneous Neumann condition.
    """
    A = mesh.stiffness()
    if robin is not None:
        A = A + mesh.robin_mass(*robin)
    f = mesh.neumann_load(neumann or {})
    y = np.zeros(mesh.n_nodes)
    free = np.ones(mesh.n_nodes, dtype=bool)
    if dirichlet_nodes is not None:
        dirichlet_nodes = np.asarray(dirichlet_nodes)
        y[dirichlet_nodes] = dirichlet_values
        free[dirichlet_nodes] = False
    A = A.tocsr()
    rhs = f[free] - A[free][:, ~free] @ y[~free]
    y[free] = BandedCholesky(A[free][:, free], mesh.bandwidth).solve(rhs)
    return y
