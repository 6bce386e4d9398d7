"""Gamma and Student-t primitives, plus digamma/trigamma.

Gamma factors are parameterized by shape ``alpha`` and rate ``beta``::

    G(t; alpha, beta) = beta**alpha / Gamma(alpha) * t**(alpha - 1) * exp(-beta * t)

``GammaParams`` accepts scalars or equal-shape arrays so that the ``n``
independent weight factors of the noise model can be held in one value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError

__all__ = [
    "GammaParams",
    "StudentTParams",
    "digamma",
    "trigamma",
    "gamma_logpdf",
    "gamma_density",
    "gamma_moments",
    "gamma_entropy",
    "student_t_logpdf",
    "student_t_density",
]

# Bernoulli numbers B_2 .. B_16 for the asymptotic expansions.
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)
_SHIFT = 6.0


def _check_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ParameterDomainError(f"{name} must be finite and positive, got {value!r}")
    return arr


@dataclass(frozen=True)
class GammaParams:
    """Shape/rate pair (scalar or componentwise arrays)."""

    shape: float | np.ndarray
    rate: float | np.ndarray

    def __post_init__(self):
        shape = _check_positive("shape", self.shape)
        rate = _check_positive("rate", self.rate)
        if shape.shape != rate.shape and shape.ndim and rate.ndim:
            raise ParameterDomainError(
                f"shape and rate arrays differ in size: {shape.shape} vs {rate.shape}"
            )

    @property
    def mean(self):
        return self.shape / self.rate

    @property
    def mean_log(self):
        return digamma(self.shape) - np.log(self.rate)

    def __len__(self):
        return int(np.broadcast(np.asarray(self.shape), np.asarray(self.rate)).size)

    def to_student_t(self) -> "StudentTParams":
        """Inverse of ``StudentTParams.to_gamma`` (scalar parameters only)."""
        dof = 2.0 * float(self.shape)
        return StudentTParams(dof=dof, scale=math.sqrt(2.0 * float(self.rate) / dof))


@dataclass(frozen=True)
class StudentTParams:
    """Degrees of freedom and scale of a centered t distribution."""

    dof: float
    scale: float

    def __post_init__(self):
        _check_positive("dof", self.dof)
        _check_positive("scale", self.scale)

    def to_gamma(self) -> GammaParams:
        """Gamma law of the precision in the scale-mixture representation."""
        return GammaParams(self.dof / 2.0, self.dof * self.scale**2 / 2.0)


def digamma(s):
    """Digamma function for positive real arguments (scalar or array).

    Shifts the argument up to ``s >= 6`` with ``psi(s) = psi(s + 1) - 1/s``
    and then sums the asymptotic series through the ``s**-16`` term.
    """
    x = _check_positive("s", s).astype(float, copy=True)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    acc = np.zeros_like(x)
    small = x < _SHIFT
    while np.any(small):
        acc[small] -= 1.0 / x[small]
        x[small] += 1.0
        small = x < _SHIFT
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for k in range(len(_BERNOULLI), 0, -1):
        series = series * inv2 + _BERNOULLI[k - 1] / (2 * k)
    out = acc + np.log(x) - 0.5 / x - series * inv2
    return float(out[0]) if scalar else out


def trigamma(s):
    """Derivative of ``digamma``; same shift-then-asymptotic scheme."""
    x = _check_positive("s", s).astype(float, copy=True)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    acc = np.zeros_like(x)
    small = x < _SHIFT
    while np.any(small):
        acc[small] += 1.0 / x[small] ** 2
        x[small] += 1.0
        small = x < _SHIFT
    inv = 1.0 / x
    inv2 = inv * inv
    series = np.zeros_like(x)
    for k in range(len(_BERNOULLI), 0, -1):
        series = series * inv2 + _BERNOULLI[k - 1]
    out = acc + inv + 0.5 * inv2 + series * inv2 * inv
    return float(out[0]) if scalar else out


def _lgamma(a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        return math.lgamma(float(a))
    return np.vectorize(math.lgamma, otypes=[float])(a)


def gamma_logpdf(t, p: GammaParams):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ParameterDomainError("Gamma density requires finite t >= 0")
    alpha = np.asarray(p.shape, dtype=float)
    beta = np.asarray(p.rate, dtype=float)
    if np.any((t == 0) & (alpha < 1)):
        raise ParameterDomainError("Gamma density with shape < 1 is unbounded at t = 0")
    with np.errstate(divide="ignore"):
        log_t_term = np.where(alpha == 1, 0.0, (alpha - 1) * np.log(np.where(t == 0, 1.0, t)))
        log_t_term = np.where((t == 0) & (alpha > 1), -np.inf, log_t_term)
    out = alpha * np.log(beta) - _lgamma(alpha) + log_t_term - beta * t
    return float(out) if np.ndim(out) == 0 else out


def gamma_density(t, p: GammaParams):
    """Gamma density at ``t``; ``t = 0`` is rejected when ``shape < 1``."""
    return np.exp(gamma_logpdf(t, p))


def gamma_moments(p: GammaParams):
    """Return ``(E[t], E[ln t])`` under ``G(alpha, beta)``."""
    return p.mean, p.mean_log


def gamma_entropy(p: GammaParams):
    a = np.asarray(p.shape, dtype=float)
    b = np.asarray(p.rate, dtype=float)
    return a - np.log(b) + _lgamma(a) + (1.0 - a) * digamma(a)


def student_t_logpdf(z, p: StudentTParams):
    nu, sigma = p.dof, p.scale
    z = np.asarray(z, dtype=float)
    log_norm = (
        math.lgamma((nu + 1) / 2)
        - math.lgamma(nu / 2)
        - 0.5 * math.log(math.pi * nu)
        - math.log(sigma)
    )
    out = log_norm - (nu + 1) / 2 * np.log1p((z / sigma) ** 2 / nu)
    return float(out) if out.ndim == 0 else out


def student_t_density(z, p: StudentTParams):
    return np.exp(student_t_logpdf(z, p))
