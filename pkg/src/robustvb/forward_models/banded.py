"""Banded Cholesky wrapper used by every PDE solve in the package."""
from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sparse

from ..errors import FactorizationError


def to_upper_banded(A, bandwidth: int) -> np.ndarray:
    """Pack the upper triangle of a symmetric matrix into LAPACK banded storage."""
    A = sparse.coo_matrix(A)
    n = A.shape[0]
    ab = np.zeros((bandwidth + 1, n))
    keep = A.col >= A.row
    rows, cols, vals = A.row[keep], A.col[keep], A.data[keep]
    if np.any(cols - rows > bandwidth):
        raise ValueError("matrix has entries outside the declared bandwidth")
    np.add.at(ab, (bandwidth + rows - cols, cols), vals)
    return ab


def bandwidth_of(A) -> int:
    A = sparse.coo_matrix(A)
    if A.nnz == 0:
        return 0
    return int(np.max(np.abs(A.col - A.row)))


class BandedCholesky:
    """Factor a sparse SPD matrix once and solve against many right-hand sides."""

    def __init__(self, A, bandwidth: int | None = None):
        if bandwidth is None:
            bandwidth = bandwidth_of(A)
        self._factor(to_upper_banded(A, bandwidth))

    @classmethod
    def from_banded(cls, ab: np.ndarray) -> "BandedCholesky":
        """Factor a matrix already in upper LAPACK banded storage."""
        self = cls.__new__(cls)
        self._factor(ab)
        return self

    def _factor(self, ab):
        self.bandwidth = ab.shape[0] - 1
        self.n = ab.shape[1]
        try:
            self._cb = la.cholesky_banded(ab, lower=False, check_finite=False)
        except la.LinAlgError as exc:
            raise FactorizationError(f"matrix is not positive definite: {exc}") from exc

    def solve(self, b):
        return la.cho_solve_banded((self._cb, False), b, check_finite=False)

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(self._cb[-1])))
