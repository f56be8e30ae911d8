"""The measurement model: y = A x + sigma * N(0,1), plus error metrics.

The error metric is the mean absolute deviation over components. That is
what reproduces the observed noise floors (sigma = 1 reads about 0.8,
sigma = 5 about 4, i.e. sigma * sqrt(2/pi)); an RMS definition would read
1 and 5 instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, rng
from .errors import DimensionError

__all__ = [
    "NOISELESS",
    "MeasurementRecord",
    "NoiseModel",
    "measure",
    "psnr",
    "residual_error",
]


@dataclass(frozen=True)
class NoiseModel:
    """Seeded Gaussian noise specification (standard deviation, stream seed)."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma >= 0):
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    def child(self, index: int) -> "NoiseModel":
        """Independent child stream for the index-th call on this model."""
        return NoiseModel(self.sigma, rng.derive_seed(self.seed, index))

    def vector(self, n: int, dtype=np.float64) -> np.ndarray:
        """sigma * N(0,1) draws; exact zeros when sigma == 0."""
        if self.sigma == 0:
            return np.zeros(n, dtype=dtype)
        draws = rng.gaussian_vector(self.seed, n, dtype)
        return draws * np.dtype(dtype).type(self.sigma)


NOISELESS = NoiseModel(0.0, 0)


@dataclass(frozen=True)
class MeasurementRecord:
    """One recorded measurement: value, measuring-matrix label, noise snapshot."""

    y: np.ndarray
    matrix_id: str
    noise: NoiseModel


def measure(a, x, noise: NoiseModel = NOISELESS) -> np.ndarray:
    """Measure image x under matrix a with per-component Gaussian noise.

    sigma == 0 takes a separate branch so the noiseless path is
    bit-identical to plain a @ x.
    """
    y = linalg.matvec(a, x)
    if noise.sigma == 0:
        return y
    return y + noise.vector(y.shape[0], a.dtype)


def residual_error(y_ref, y_est) -> float:
    """Mean absolute deviation between two measurement vectors."""
    if y_ref.shape != y_est.shape or y_ref.ndim != 1:
        raise DimensionError(f"length mismatch: {y_ref.shape} vs {y_est.shape}")
    if y_ref.dtype != y_est.dtype:
        raise DimensionError(f"mixed precisions {y_ref.dtype} vs {y_est.dtype}")
    diff = y_ref - y_est
    return float(linalg.sum_abs(diff)) / diff.shape[0]


def psnr(x_ref, x_est) -> float:
    """10 log10(1 / MSE) for [0,1]-ranged references; +inf marks an exact match."""
    if x_ref.shape != x_est.shape or x_ref.ndim != 1:
        raise DimensionError(f"length mismatch: {x_ref.shape} vs {x_est.shape}")
    if np.min(x_ref) < 0 or np.max(x_ref) > 1:
        raise ValueError("psnr reference must lie in [0, 1]")
    diff = np.ascontiguousarray(x_ref - x_est)
    mse = float(linalg.dot(diff, diff)) / diff.shape[0]
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)
