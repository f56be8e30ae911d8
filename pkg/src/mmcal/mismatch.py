"""The rank-one matching construction and its attendant scalars.

Given a pre-measurement y0 = A pm and any target value y, the construction

    A_recv = (1 / (y0^T S y0)) y y0^T S A

produces a matrix whose action on the image behind y0 reproduces y, for
any nonsingular weighting matrix S. This module provides that solution,
the special weighting S = (A A^T)^-1, the scalar multiplier of the
rank-one family, the geometric decay coefficient of the iterative
constructors, and the component-ratio diagnostic used by the precision
study.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DegenerateDenominatorError, DimensionError, SingularMatrixError
from .precision import Precision

__all__ = [
    "ConvergenceCoefficient",
    "LambdaStats",
    "MismatchSolution",
    "k_epsilon",
    "lambda_vector",
    "mismatch_solution",
    "multiplier_k",
    "sigma_special",
]


@dataclass(frozen=True)
class MismatchSolution:
    """A rank-one replacement matrix with the pieces it was built from."""

    a_recv: np.ndarray
    y0: np.ndarray
    y: np.ndarray
    sigma_used: np.ndarray


@dataclass(frozen=True)
class ConvergenceCoefficient:
    """Geometric ratio of the iterative error recurrence."""

    k_eps: float

    @property
    def converges(self) -> bool:
        return abs(self.k_eps) < 1.0


@dataclass(frozen=True)
class LambdaStats:
    """Component-wise response ratios of one matrix against two images."""

    values: np.ndarray
    excluded: int = 0
    range: float = field(init=False)
    std: float = field(init=False)
    mean: float = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.size:
            object.__setattr__(self, "range", float(vals.max() - vals.min()))
            object.__setattr__(self, "std", float(vals.std()))
            object.__setattr__(self, "mean", float(vals.mean()))
        else:
            object.__setattr__(self, "range", float("nan"))
            object.__setattr__(self, "std", float("nan"))
            object.__setattr__(self, "mean", float("nan"))


def _weighted_row(y0, sigma):
    """y0^T S along with the denominator y0^T S y0, floor-checked.

    The floor is relative (precision-scaled) so behavior is scale
    invariant: |y0^T S y0| >= floor * ||y0|| * ||y0^T S||.
    """
    u = linalg.vecmat(y0, sigma)
    d = linalg.dot(u, y0)
    prec = Precision.from_dtype(y0.dtype)
    floor = prec.denominator_floor * float(linalg.norm2(y0)) * float(linalg.norm2(u))
    if abs(float(d)) < floor or d == 0:
        raise DegenerateDenominatorError(
            f"y0^T S y0 = {float(d):.3e} below relative floor {floor:.3e}"
        )
    return u, d


def sigma_special(a) -> np.ndarray:
    """The special weighting (A A^T)^-1 for a wide row-full-rank matrix."""
    if a.ndim != 2 or a.shape[0] >= a.shape[1]:
        raise DimensionError(f"expected a wide matrix (rows < cols), got {a.shape}")
    gram = linalg.matmul(a, linalg.transpose(a))
    try:
        return linalg.inverse(gram)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"A A^T singular; A is not row-full-rank: {exc}") from exc


def mismatch_solution(y0, y, sigma, a) -> MismatchSolution:
    """Rank-one matrix reproducing y on the image that pre-measured to y0."""
    m, n = a.shape
    if y0.shape != (m,) or y.shape != (m,) or sigma.shape != (m, m):
        raise DimensionError(
            f"inconsistent shapes: y0 {y0.shape}, y {y.shape}, sigma {sigma.shape}, a {a.shape}"
        )
    u, d = _weighted_row(y0, sigma)
    row = linalg.vecmat(u, a)
    scaled_y = y * (y.dtype.type(1) / d)
    a_recv = np.multiply.outer(scaled_y, row)
    return MismatchSolution(a_recv=a_recv, y0=y0.copy(), y=y.copy(), sigma_used=sigma)


def multiplier_k(y0, sigma, a, x) -> float:
    """Scalar k(x) with A_recv^(e) x = k(x) e for every error vector e."""
    u, d = _weighted_row(y0, sigma)
    row = linalg.vecmat(u, a)
    return float(linalg.dot(row, x) / d)


def k_epsilon(y0, sigma, a, pm, x) -> ConvergenceCoefficient:
    """Decay coefficient 1 - (y0^T S A x) / (y0^T S y0) of the iteration.

    The precondition y0 = A pm is validated here rather than trusted: a
    violated precondition silently invalidates the convergence law.
    """
    prec = Precision.from_dtype(y0.dtype)
    check_tol = (1e-8 if prec is Precision.BITS64 else 1e-4) * max(
        1.0, float(linalg.max_abs(y0))
    )
    drift = float(linalg.max_abs(y0 - linalg.matvec(a, pm)))
    if drift > check_tol:
        raise ValueError(
            f"y0 != A pm (max deviation {drift:.3e} > {check_tol:.3e}); "
            "k_epsilon is only meaningful for a true pre-measurement"
        )
    return ConvergenceCoefficient(1.0 - multiplier_k(y0, sigma, a, x))


def lambda_vector(a_recv, x_prime, x_other, drop_small: bool = False) -> LambdaStats:
    """Component-wise (A_recv x_other) / (A_recv x_prime) with spread stats.

    Components whose denominator sits below the relative floor either
    raise (default) or are excluded and counted (``drop_small=True``).
    """
    den = linalg.matvec(a_recv, x_prime)
    num = linalg.matvec(a_recv, x_other)
    prec = Precision.from_dtype(a_recv.dtype)
    floor = prec.denominator_floor * float(linalg.max_abs(den))
    small = np.abs(den) <= floor
    n_small = int(small.sum())
    if n_small and not drop_small:
        raise DegenerateDenominatorError(
            f"{n_small} components of A_recv x' fall below the floor {floor:.3e}"
        )
    keep = ~small
    values = num[keep] / den[keep]
    return LambdaStats(values=values, excluded=n_small)
