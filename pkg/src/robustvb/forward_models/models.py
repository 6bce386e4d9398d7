"""Forward-model containers and the first-difference smoothness operator."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..errors import DimensionError


@dataclass(frozen=True)
class LinearModel:
    matrix: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.matrix, dtype=float)
        if K.ndim != 2 or min(K.shape) < 1:
            raise DimensionError(f"forward matrix must be 2-D and nonempty, got {K.shape}")
        if not np.all(np.isfinite(K)):
            raise DimensionError("forward matrix has non-finite entries")
        object.__setattr__(self, "matrix", K)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    def evaluate(self, u):
        return self.matrix @ u

    def jacobian(self, u=None):
        return self.matrix

    def as_nonlinear(self) -> "NonlinearModel":
        K = self.matrix
        return NonlinearModel(lambda u: K @ u, lambda u: K, m=self.m, n=self.n)


@dataclass(frozen=True)
class NonlinearModel:
    evaluate: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    m: int
    n: int


@dataclass(frozen=True)
class SmoothnessOperator:
    matrix: np.ndarray
    rank: int = field(init=False)

    def __post_init__(self):
        L = np.asarray(self.matrix, dtype=float)
        if L.ndim != 2:
            raise DimensionError("smoothness operator must be a 2-D array")
        rank = int(np.linalg.matrix_rank(L))
        if rank != L.shape[0]:
            raise DimensionError(f"smoothness operator must have full row rank, got {rank} < {L.shape[0]}")
        object.__setattr__(self, "matrix", L)
        object.__setattr__(self, "rank", rank)


def first_difference_operator(m: int) -> SmoothnessOperator:
    """``(m - 1) x m`` matrix with rows ``(..., -1, 1, ...)``."""
    if m < 2:
        raise DimensionError("first differences need at least two unknowns")
    L = np.zeros((m - 1, m))
    idx = np.arange(m - 1)
    L[idx, idx] = -1.0
    L[idx, idx + 1] = 1.0
    return SmoothnessOperator(L)


@dataclass(frozen=True)
class BenchmarkProblem:
    name: str
    model: LinearModel | NonlinearModel
    smoothness: SmoothnessOperator
    exact_u: np.ndarray
    exact_y: np.ndarray
    mesh_meta: dict[str, Any]

    @property
    def is_linear(self) -> bool:
        return isinstance(self.model, LinearModel)


def finite_diff_jacobian(model, u, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian, one column per coordinate of ``u``."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    u = np.asarray(u, dtype=float)
    cols = []
    for i in range(u.size):
        e = np.zeros_like(u)
        e[i] = h
        cols.append((np.asarray(model.evaluate(u + e)) - np.asarray(model.evaluate(u - e))) / (2 * h))
    return np.column_stack(cols)
