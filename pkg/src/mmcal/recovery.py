"""l1-regularized least squares via monotone FISTA.

Stands in for the black-box sparse solver of the validation pipeline:
minimize 0.5 ||y - A x||^2 + tau ||x||_1. The contract is solver-agnostic
(any l1 solver could be swapped in); acceptance rests only on the
minimization property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, rng
from .errors import DimensionError

__all__ = ["RecoveryConfig", "estimate_lipschitz", "fista_l1", "soft_threshold"]

_POWER_SEED = 0x5EED0F15


@dataclass(frozen=True)
class RecoveryConfig:
    """Solver knobs. tau=None and step=None pick automatic values.

    Auto tau is 1e-3 * ||A^T y||_inf; auto step is 1/L with L the top
    eigenvalue of A^T A from power iteration (1e-6 relative).
    """

    tau: float | None = None
    max_iters: int = 2000
    rel_tol: float = 1e-8
    step: float | None = None

    def __post_init__(self):
        if self.tau is not None and not (self.tau > 0):
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.rel_tol > 0):
            raise ValueError("rel_tol must be > 0")
        if self.step is not None and not (self.step > 0):
            raise ValueError("step must be > 0")


def soft_threshold(v, t) -> np.ndarray:
    """Component-wise sign(v) * max(|v| - t, 0)."""
    if t < 0:
        raise ValueError(f"threshold must be >= 0, got {t}")
    tt = v.dtype.type(t)
    return np.sign(v) * np.maximum(np.abs(v) - tt, v.dtype.type(0))


def estimate_lipschitz(a, tol: float = 1e-6, max_iters: int = 1000) -> float:
    """Top eigenvalue of A^T A by power iteration, to ``tol`` relative."""
    n = a.shape[1]
    v = rng.gaussian_vector(_POWER_SEED, n, a.dtype)
    v = v / linalg.norm2(v)
    lam_prev = 0.0
    lam = 0.0
    for _ in range(max_iters):
        u = linalg.vecmat(linalg.matvec(a, v), a)
        lam = float(linalg.dot(v, u))
        nu = float(linalg.norm2(u))
        if nu == 0:
            return 0.0
        v = u / a.dtype.type(nu)
        if abs(lam - lam_prev) <= tol * abs(lam):
            break
        lam_prev = lam
    return lam


def _objective(y, a, x, tau) -> float:
    r = linalg.matvec(a, x) - y
    return 0.5 * float(linalg.dot(r, r)) + tau * float(linalg.sum_abs(x))


def fista_l1(y, a, cfg: RecoveryConfig | None = None) -> np.ndarray:
    """Approximate minimizer of 0.5 ||y - A x||^2 + tau ||x||_1.

    Monotone FISTA: the tracked iterate never increases the objective, so
    the best iterate is what comes back. Stops when the relative objective
    change is at or below rel_tol and the proximal-gradient fixed-point
    residual is within 10 * rel_tol * ||x||, or at max_iters.
    """
    if cfg is None:
        cfg = RecoveryConfig()
    if a.ndim != 2 or y.shape != (a.shape[0],):
        raise DimensionError(f"shape mismatch: y {y.shape}, a {a.shape}")
    if y.dtype != a.dtype:
        raise DimensionError(f"mixed precisions {y.dtype} vs {a.dtype}")
    dt = a.dtype.type
    n = a.shape[1]
    tau = cfg.tau if cfg.tau is not None else 1e-3 * float(linalg.max_abs(linalg.vecmat(y, a)))
    if cfg.step is not None:
        step = cfg.step
    else:
        lam = estimate_lipschitz(a)
        step = 1.0 / lam if lam > 0 else 1.0
    step_t = dt(step)
    thresh = dt(step * tau)

    x = np.zeros(n, dtype=a.dtype)
    f_x = _objective(y, a, x, tau)
    w = x.copy()
    t = 1.0
    for _ in range(cfg.max_iters):
        grad = linalg.vecmat(linalg.matvec(a, w) - y, a)
        z = soft_threshold(w - step_t * grad, thresh)
        f_z = _objective(y, a, z, tau)
        if f_z <= f_x:
            t_new = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
            w = z + dt((t - 1.0) / t_new) * (z - x)
            delta = f_x - f_z
            x, f_x, t = z, f_z, t_new
            if delta <= cfg.rel_tol * max(f_x, 1e-300):
                fp = x - soft_threshold(
                    x - step_t * linalg.vecmat(linalg.matvec(a, x) - y, a), thresh)
                if float(linalg.norm2(fp)) <= 10.0 * cfg.rel_tol * float(linalg.norm2(x)):
                    break
        else:
            # Function-value restart: drop the momentum and step from the
            # best iterate again; keeps the tracked objective monotone.
            t = 1.0
            w = x.copy()
    return x
