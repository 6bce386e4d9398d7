"""Impulsive noise, accuracy metric and outlier-weight diagnostics.

Corruption draws from two independent Philox streams derived from one seed
through ``numpy.random.SeedSequence(seed).spawn(2)``:

* stream 0 gives one uniform ``v_i`` per datum; site ``i`` is corrupted when
  ``v_i < r``.
* stream 1 gives two uniforms ``(a_i, b_i)`` per datum, turned into a
  standard normal by Box-Muller, ``sqrt(-2 ln(1 - a)) * cos(2 pi b)``.

Every datum consumes its draws whether or not it is corrupted, so for a
fixed seed the corrupted sets are nested in ``r`` and each site always sees
the same Gaussian deviate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMaskError, ParameterDomainError, UndefinedMetricError


@dataclass(frozen=True)
class NoiseSpec:
    corruption_rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.corruption_rate <= 1.0:
            raise ParameterDomainError(f"corruption rate must lie in [0, 1], got {self.corruption_rate}")


@dataclass(frozen=True)
class CorruptionResult:
    data: np.ndarray
    mask: np.ndarray
    noise: np.ndarray
    magnitude: float

    @property
    def realized_rate(self) -> float:
        return float(np.mean(self.mask))


def _streams(seed: int):
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1))
    return [np.random.Generator(np.random.Philox(s)) for s in ss.spawn(2)]


def standard_normals(gen: np.random.Generator, n: int) -> np.ndarray:
    ab = gen.random((n, 2))
    return np.sqrt(-2.0 * np.log1p(-ab[:, 0])) * np.cos(2.0 * np.pi * ab[:, 1])


def corrupt(y_exact, spec: NoiseSpec) -> CorruptionResult:
    """Add ``eps * zeta_i`` to each datum with probability ``r``, ``eps = max|y_exact|``."""
    y_exact = np.asarray(y_exact, dtype=float)
    n = y_exact.size
    if n < 1:
        raise ParameterDomainError("need at least one datum")
    mask_gen, gauss_gen = _streams(spec.seed)
    mask = mask_gen.random(n) < spec.corruption_rate
    zeta = standard_normals(gauss_gen, n)
    eps = float(np.max(np.abs(y_exact)))
    data = y_exact.copy()
    data[mask] = y_exact[mask] + eps * zeta[mask]
    return CorruptionResult(data, mask, np.where(mask, eps * zeta, 0.0), eps)


def relative_error(u, u_exact) -> float:
    u_exact = np.asarray(u_exact, dtype=float)
    ref = float(np.linalg.norm(u_exact))
    if ref == 0.0:
        raise UndefinedMetricError("relative error is undefined for a zero reference")
    return float(np.linalg.norm(np.asarray(u, dtype=float) - u_exact)) / ref


@dataclass(frozen=True)
class WeightSeparation:
    min_clean: float
    max_corrupt: float

    @property
    def separated(self) -> bool:
        return self.max_corrupt < self.min_clean


def weight_separation(weights, mask) -> WeightSeparation:
    """Do all corrupted sites carry smaller expected weights than every clean site?"""
    weights = np.asarray(weights, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if mask.all() or not mask.any():
        raise DegenerateMaskError("mask must contain both clean and corrupted sites")
    return WeightSeparation(float(weights[~mask].min()), float(weights[mask].max()))
