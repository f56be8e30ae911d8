"""Exact calibration of an unknown measurement matrix.

Two schemes. The M-dimensional one measures the M orthonormal basis
images Q = qr(A^T) under the unknown matrix and sums the rank-one
solutions; the result acts exactly like A_u on span(Q) and like
A_u Q Q^T elsewhere. The grouped scheme runs the same construction over
canonical basis images, M columns at a time, and reassembles the full
matrix column range by column range -- recovering A_u itself at the cost
of N unknown measurements.

Both rely on the weighting condition Y S Y^T = I over the group's
pre-measurements, which makes the cross multipliers k(i, j) collapse to
the Kronecker delta.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionError, SingularMatrixError
from .measurement import NOISELESS, MeasurementRecord, NoiseModel, measure
from .mismatch import _weighted_row

__all__ = [
    "BasisProvenance",
    "CalibrationBasis",
    "CalibrationResult",
    "Coordinates",
    "GroupDescriptor",
    "MatrixOracle",
    "calibrate_mspace",
    "calibrate_ndim_grouped",
    "coordinates",
    "embed_images_in_space",
    "sigma_from_premeasure",
]

# Relative residual below which an image counts as lying in the basis span.
IN_SPAN_RTOL_64 = 1e-8
IN_SPAN_RTOL_32 = 1e-3


class MatrixOracle:
    """Measurement access to a hidden matrix: measure(x) = A_u x + noise."""

    def __init__(self, a_u, noise: NoiseModel = NOISELESS, label: str = "unknown-matrix"):
        self._a_u = linalg.as_matrix(a_u)
        self.noise = noise
        self.label = label
        self.records: list[MeasurementRecord] = []

    @property
    def measure_count(self) -> int:
        return len(self.records)

    @property
    def shape(self):
        return self._a_u.shape

    def measure(self, x) -> np.ndarray:
        child = self.noise.child(self.measure_count)
        y = measure(self._a_u, x, child)
        self.records.append(MeasurementRecord(y=y, matrix_id=self.label, noise=child))
        return y


class BasisProvenance(enum.Enum):
    QR_OF_KNOWN_MATRIX = "qr_of_known_matrix"
    QR_WITH_EMBEDDED_IMAGES = "qr_with_embedded_images"


@dataclass(frozen=True)
class CalibrationBasis:
    """Orthonormal basis images (columns of q) and how they were produced."""

    q: np.ndarray
    provenance: BasisProvenance


@dataclass(frozen=True)
class Coordinates:
    """Least-squares coordinates of an image in a calibration basis."""

    b: np.ndarray
    in_span: bool
    rel_residual: float


@dataclass(frozen=True)
class GroupDescriptor:
    """Half-open column ranges partitioning [0, N) into groups of size <= M."""

    group_ranges: tuple

    def __post_init__(self):
        stop = 0
        for lo, hi in self.group_ranges:
            if lo != stop or hi <= lo:
                raise ValueError(f"ranges must partition [0, N) in order, got {self.group_ranges}")
            stop = hi


@dataclass(frozen=True)
class CalibrationResult:
    a_recv: np.ndarray
    sigma: np.ndarray | None
    basis: CalibrationBasis | GroupDescriptor
    unknown_measure_count: int
    group_sigmas: tuple | None = None


def _refined_inverse(mat) -> np.ndarray:
    """Inverse plus one Newton step X(2I - M X); buys ~3 digits of residual."""
    inv = linalg.inverse(mat)
    eye2 = 2.0 * linalg.identity(mat.shape[0], linalg.precision_of(mat))
    return linalg.matmul(inv, eye2 - linalg.matmul(mat, inv))


def sigma_from_premeasure(y_rows) -> np.ndarray:
    """Weighting S with Y S Y^T = I for a full-row-rank Y (rows = pre-measurements).

    The defining form is the pseudo-inverse composition
    Y^T (Y Y^T)^-1 (Y Y^T)^-1 Y. For square Y this equals Y^-1 Y^-T, which
    is evaluated directly: it carries cond(Y) instead of cond(Y)^2 and
    keeps the identity condition tight for ill-conditioned groups.
    """
    if y_rows.ndim != 2 or y_rows.shape[0] > y_rows.shape[1]:
        raise DimensionError(f"expected rows <= cols, got {y_rows.shape}")
    try:
        if y_rows.shape[0] == y_rows.shape[1]:
            inv = _refined_inverse(y_rows)
            return linalg.matmul(inv, linalg.transpose(inv))
        gram = linalg.matmul(y_rows, linalg.transpose(y_rows))
        gram_inv = _refined_inverse(gram)
        left = linalg.matmul(linalg.transpose(y_rows), gram_inv)
        return linalg.matmul(linalg.matmul(left, gram_inv), y_rows)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"pre-measurement rows are rank-deficient: {exc}") from exc


def _rank_one_sum(a_recv, y0_cols, yu_cols, sigma, a_block):
    """Accumulate the rank-one solutions over basis columns into a_recv."""
    one = a_block.dtype.type(1)
    for i in range(y0_cols.shape[1]):
        y0 = np.ascontiguousarray(y0_cols[:, i])
        u, d = _weighted_row(y0, sigma)
        row = linalg.vecmat(u, a_block)
        a_recv += np.multiply.outer(yu_cols[:, i] * (one / d), row)


def calibrate_mspace(a, unknown_oracle: MatrixOracle, images_in_span=()) -> CalibrationResult:
    """Calibrate over the M-dimensional row space of the known matrix.

    Measures the M basis images (columns of qr(A^T)) under the unknown
    matrix, builds the weighting from the fully computable pre-measurement
    block, and sums the rank-one solutions. ``images_in_span`` embeds the
    given images into the basis first (they replace leading rows of A), so
    the calibrated matrix matches them exactly in the noiseless case.
    """
    if a.ndim != 2 or a.shape[0] >= a.shape[1]:
        raise DimensionError(f"expected a wide matrix (rows < cols), got {a.shape}")
    provenance = BasisProvenance.QR_OF_KNOWN_MATRIX
    if len(images_in_span):
        a = embed_images_in_space(a, images_in_span)
        provenance = BasisProvenance.QR_WITH_EMBEDDED_IMAGES
    m, n = a.shape
    calls_before = unknown_oracle.measure_count
    q = linalg.qr_thin(linalg.transpose(a))
    y_pre = linalg.matmul(a, q)
    sigma = sigma_from_premeasure(linalg.transpose(y_pre))
    yu_cols = np.empty((m, m), dtype=a.dtype)
    for i in range(m):
        yu_cols[:, i] = unknown_oracle.measure(np.ascontiguousarray(q[:, i]))
    a_recv = np.zeros((m, n), dtype=a.dtype)
    _rank_one_sum(a_recv, y_pre, yu_cols, sigma, a)
    return CalibrationResult(
        a_recv=a_recv,
        sigma=sigma,
        basis=CalibrationBasis(q=q, provenance=provenance),
        unknown_measure_count=unknown_oracle.measure_count - calls_before,
    )


def coordinates(basis: CalibrationBasis, x) -> Coordinates:
    """Least-squares coordinates b = Q^T x, with an in-span flag.

    For orthonormal Q this is the unique minimizer of ||x - Q b||; the
    image is in-span when the relative residual is at or below the
    precision-scaled tolerance.
    """
    q = basis.q
    if x.shape != (q.shape[0],):
        raise DimensionError(f"image length {x.shape} does not match basis {q.shape}")
    b = linalg.vecmat(x, q)
    resid = x - linalg.matvec(q, b)
    norm_x = float(linalg.norm2(x))
    rel = float(linalg.norm2(resid)) / norm_x if norm_x > 0 else 0.0
    rtol = IN_SPAN_RTOL_64 if x.dtype == np.float64 else IN_SPAN_RTOL_32
    return Coordinates(b=b, in_span=rel <= rtol, rel_residual=rel)


def embed_images_in_space(a, images) -> np.ndarray:
    """Replace leading rows of the known matrix with the given images.

    The returned matrix's transpose then spans the images, so a basis
    computed from it contains them. Raises RankDeficientError (from the
    QR check) if the replacement destroys full row rank.
    """
    if a.ndim != 2 or a.shape[0] >= a.shape[1]:
        raise DimensionError(f"expected a wide matrix (rows < cols), got {a.shape}")
    images = list(images)
    if len(images) > a.shape[0]:
        raise DimensionError(f"cannot embed {len(images)} images into {a.shape[0]} rows")
    if not images:
        return a.copy()
    out = a.copy()
    for i, img in enumerate(images):
        img = np.asarray(img, dtype=a.dtype)
        if img.shape != (a.shape[1],):
            raise DimensionError(f"image {i} has length {img.shape}, expected {a.shape[1]}")
        out[i, :] = img
    linalg.qr_thin(linalg.transpose(out))  # full-row-rank check
    return out


def calibrate_ndim_grouped(a, unknown_oracle: MatrixOracle) -> CalibrationResult:
    """Calibrate the full N-dimensional space over canonical basis images.

    Canonical basis vectors are grouped M at a time; the group's
    pre-measurements are literally columns of A (known, no simulated
    measurement needed), each group gets its own weighting, and the final
    matrix takes each group's column range from that group's sum. In the
    noiseless case this reproduces the unknown matrix exactly.

    Unlike the other constructions this one never needs A's full row
    space, only per-group column independence, so N <= M degenerates to a
    single group rather than being rejected.
    """
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got ndim={a.ndim}")
    m, n = a.shape
    calls_before = unknown_oracle.measure_count
    ranges = tuple((lo, min(lo + m, n)) for lo in range(0, n, m))
    descriptor = GroupDescriptor(group_ranges=ranges)
    a_recv = np.zeros((m, n), dtype=a.dtype)
    sigmas = []
    for gi, (lo, hi) in enumerate(ranges):
        y0_cols = np.ascontiguousarray(a[:, lo:hi])
        try:
            sigma_g = sigma_from_premeasure(linalg.transpose(y0_cols))
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"group {gi} (columns {lo}:{hi}): {exc}") from exc
        sigmas.append(sigma_g)
        yu_cols = np.empty((m, hi - lo), dtype=a.dtype)
        for j, col in enumerate(range(lo, hi)):
            e = np.zeros(n, dtype=a.dtype)
            e[col] = 1
            yu_cols[:, j] = unknown_oracle.measure(e)
        a_block = np.ascontiguousarray(a[:, lo:hi])
        block = np.zeros((m, hi - lo), dtype=a.dtype)
        _rank_one_sum(block, y0_cols, yu_cols, sigma_g, a_block)
        a_recv[:, lo:hi] = block
    return CalibrationResult(
        a_recv=a_recv,
        sigma=None,
        basis=descriptor,
        unknown_measure_count=unknown_oracle.measure_count - calls_before,
        group_sigmas=tuple(sigmas),
    )
