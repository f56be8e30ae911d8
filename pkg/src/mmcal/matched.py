"""Iterative matched-solution constructors.

Both constructors accumulate rank-one corrections sharing a single fixed
row vector (y0^T S A) / (y0^T S y0), driving the measured value of one
specific hidden image toward its target. The image itself is never read:
it is reachable only through a measurement oracle, mirroring the physical
acquisition model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DegenerateDenominatorError, DimensionError
from .measurement import NOISELESS, MeasurementRecord, NoiseModel, measure, residual_error
from .mismatch import sigma_special, _weighted_row
from .precision import Precision

__all__ = [
    "ImageOracle",
    "IterationTrace",
    "MatchedSolutionResult",
    "algorithm1",
    "algorithm2",
    "construct_initial",
    "scale_coefficient",
]

# Epochs of strictly increasing error before a run is flagged non-convergent.
PATIENCE = 10


class ImageOracle:
    """Measurement-only access to a hidden image.

    Algorithms receive this object instead of the pixels: the only path to
    the image is a measurement under a caller-supplied matrix, drawn from
    the oracle's noise stream (one child stream per call) and counted
    against the measurement budget. ``reference_measure`` is a noise-free
    diagnostic readout used for error traces; it is not counted.
    """

    def __init__(self, x, noise: NoiseModel = NOISELESS, label: str = "unknown-image"):
        self._x = linalg.as_vector(x)
        self.noise = noise
        self.label = label
        self.records: list[MeasurementRecord] = []

    @property
    def measure_count(self) -> int:
        return len(self.records)

    @property
    def image_length(self) -> int:
        return self._x.shape[0]

    def measure(self, a_recv) -> np.ndarray:
        child = self.noise.child(self.measure_count)
        y = measure(a_recv, self._x, child)
        self.records.append(MeasurementRecord(y=y, matrix_id=self.label, noise=child))
        return y

    def reference_measure(self, a_recv) -> np.ndarray:
        return measure(a_recv, self._x, NOISELESS)


@dataclass(frozen=True)
class IterationTrace:
    """Per-epoch true residual errors of one run."""

    errors: list[float]
    epoch_of_best: int = field(init=False)

    def __post_init__(self):
        if not self.errors:
            raise ValueError("trace requires at least one epoch")
        best = min(range(len(self.errors)), key=self.errors.__getitem__)
        object.__setattr__(self, "epoch_of_best", best + 1)


@dataclass(frozen=True)
class MatchedSolutionResult:
    a_recv: np.ndarray
    trace: IterationTrace
    k_eps_estimate: float
    epochs_run: int
    non_convergence: bool
    measure_calls: int


def _validate_inputs(y_prime, a, pm):
    if a.ndim != 2 or a.shape[0] >= a.shape[1]:
        raise DimensionError(f"expected a wide matrix (rows < cols), got {a.shape}")
    m, n = a.shape
    if y_prime.shape != (m,) or pm.shape != (n,):
        raise DimensionError(
            f"shape mismatch: y' {y_prime.shape}, pm {pm.shape}, a {a.shape}"
        )
    if y_prime.dtype != a.dtype or pm.dtype != a.dtype:
        raise DimensionError("y', pm and a must share one precision")


def _update_row(a, pm):
    """The fixed rank-one row (y0^T S A) / (y0^T S y0), plus y0 itself."""
    sigma = sigma_special(a)
    y0 = linalg.matvec(a, pm)
    u, d = _weighted_row(y0, sigma)
    row = linalg.vecmat(u, a)
    return y0, row * (a.dtype.type(1) / d)


def _flag_non_convergence(errors: list[float]) -> bool:
    rising = 0
    for prev, cur in zip(errors, errors[1:]):
        rising = rising + 1 if cur > prev else 0
        if rising >= PATIENCE:
            return True
    return False


def _estimate_k(e_prev_list: list[np.ndarray]) -> float:
    """Signed decay ratio from successive error vectors (diagnostic only).

    Ratios stop being sampled once the error has shrunk ten orders below
    its start: past that the vectors are rounding noise.
    """
    den0 = float(linalg.dot(e_prev_list[0], e_prev_list[0]))
    ratios = []
    for e0, e1 in zip(e_prev_list, e_prev_list[1:]):
        den = float(linalg.dot(e0, e0))
        if den > 1e-20 * den0:
            ratios.append(float(linalg.dot(e1, e0)) / den)
    if not ratios:
        return 0.0
    return float(np.median(ratios))


def algorithm1(y_prime, oracle: ImageOracle, a, pm, epochs: int = 200) -> MatchedSolutionResult:
    """Match y' by re-measuring the hidden image under A_recv every epoch.

    Per epoch the current error vector enters the rank-one construction,
    the increment is accumulated, and the error is refreshed from a new
    (noisy) measurement. Converges geometrically with ratio k_eps while
    |k_eps| < 1; with noise the floor is sigma * sqrt(2/pi).
    """
    _validate_inputs(y_prime, a, pm)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    calls_before = oracle.measure_count
    y0, row = _update_row(a, pm)
    a_recv = np.zeros(a.shape, dtype=a.dtype)
    e_y = y_prime.copy()
    errors: list[float] = []
    e_history = [e_y]
    for _ in range(epochs):
        a_recv += np.multiply.outer(e_y, row)
        y_meas = oracle.measure(a_recv)
        e_y = y_prime - y_meas
        e_history.append(e_y)
        errors.append(residual_error(y_prime, oracle.reference_measure(a_recv)))
    return MatchedSolutionResult(
        a_recv=a_recv,
        trace=IterationTrace(errors),
        k_eps_estimate=_estimate_k(e_history),
        epochs_run=epochs,
        non_convergence=_flag_non_convergence(errors),
        measure_calls=oracle.measure_count - calls_before,
    )


def construct_initial(a, pm, epochs: int = 5):
    """Offline initial solution: A_recv0 with A_recv0 pm = y0.

    Entirely computable from known quantities (no unknown-image
    measurements). One epoch is exact in exact arithmetic; the extra
    epochs mop up floating-point error, which matters in 32-bit mode.
    """
    if a.ndim != 2 or a.shape[0] >= a.shape[1]:
        raise DimensionError(f"expected a wide matrix (rows < cols), got {a.shape}")
    if pm.shape != (a.shape[1],) or pm.dtype != a.dtype:
        raise DimensionError(f"pm {pm.shape}/{pm.dtype} incompatible with a {a.shape}/{a.dtype}")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    y0, row = _update_row(a, pm)
    a_recv = np.zeros(a.shape, dtype=a.dtype)
    e_y = y0.copy()
    for _ in range(epochs):
        a_recv += np.multiply.outer(e_y, row)
        e_y = y0 - linalg.matvec(a_recv, pm)
    return y0, a_recv


def scale_coefficient(y, y_pm) -> float:
    """Least-squares scalar k with y ~= k y_pm.

    Equals the exact ratio when y = k y_pm + noise with noise orthogonal
    to y_pm, and avoids the division-by-near-zero components a literal
    component-wise ratio would hit.
    """
    if y.shape != y_pm.shape or y.ndim != 1:
        raise DimensionError(f"length mismatch: {y.shape} vs {y_pm.shape}")
    if y.dtype != y_pm.dtype:
        raise DimensionError(f"mixed precisions {y.dtype} vs {y_pm.dtype}")
    prec = Precision.from_dtype(y.dtype)
    n_pm = float(linalg.norm2(y_pm))
    floor = prec.denominator_floor * max(float(linalg.norm2(y)), 1e-300)
    if n_pm <= floor:
        raise DegenerateDenominatorError(
            f"||y_pm|| = {n_pm:.3e} below relative floor {floor:.3e}"
        )
    return float(linalg.dot(y_pm, y) / linalg.dot(y_pm, y_pm))


def algorithm2(y_prime, oracle: ImageOracle, a, pm, epochs: int = 200,
               init_epochs: int = 5, refresh_k: bool = False) -> MatchedSolutionResult:
    """Match y' with exactly one physical measurement of the hidden image.

    The single measurement under the offline initial A_recv0 fixes the
    scale coefficient k; afterwards every re-measurement is replaced by
    k * (A_recv pm), which is fully computable. ``refresh_k`` re-estimates
    k each epoch against the one stored measurement. The default keeps k
    fixed: the stored value is only proportional to the initial A_recv0 pm,
    so re-estimating against the drifting accumulator is inconsistent and
    generally diverges; the flag exists to demonstrate exactly that.
    """
    _validate_inputs(y_prime, a, pm)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    calls_before = oracle.measure_count
    y0, a_recv0 = construct_initial(a, pm, init_epochs)
    _, row = _update_row(a, pm)
    y = oracle.measure(a_recv0)
    y_pm = linalg.matvec(a_recv0, pm)
    k = a.dtype.type(scale_coefficient(y, y_pm))
    e_y = y_prime - k * y_pm
    a_recv = a_recv0.copy()
    errors: list[float] = []
    e_history = [e_y]
    for _ in range(epochs):
        a_recv += np.multiply.outer(e_y, row)
        y_pm_cur = linalg.matvec(a_recv, pm)
        if refresh_k:
            k = a.dtype.type(scale_coefficient(y, y_pm_cur))
        e_y = y_prime - k * y_pm_cur
        e_history.append(e_y)
        errors.append(residual_error(y_prime, oracle.reference_measure(a_recv)))
    return MatchedSolutionResult(
        a_recv=a_recv,
        trace=IterationTrace(errors),
        k_eps_estimate=_estimate_k(e_history),
        epochs_run=epochs,
        non_convergence=_flag_non_convergence(errors),
        measure_calls=oracle.measure_count - calls_before,
    )
