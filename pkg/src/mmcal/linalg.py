"""Dense real linear algebra with explicit 32/64-bit precision.

Thin validating wrappers over the backend kernels: matrix product,
Gauss-Jordan inverse, pseudo-inverse of wide full-row-rank matrices, and
Householder thin QR. All functions are pure (inputs never mutated) and
deterministic; the working precision is carried by the array dtype and
never silently promoted.
"""

from __future__ import annotations

import numpy as np

from .backend import kernels
from .errors import DimensionError, RankDeficientError, SingularMatrixError
from .precision import Precision

__all__ = [
    "as_matrix",
    "as_vector",
    "dot",
    "identity",
    "inverse",
    "matmul",
    "matvec",
    "max_abs",
    "norm2",
    "pinv_wide",
    "precision_of",
    "qr_thin",
    "sum_abs",
    "transpose",
    "vecmat",
]


def precision_of(arr) -> Precision:
    return Precision.from_dtype(arr.dtype)


def as_matrix(data, precision: Precision | None = None) -> np.ndarray:
    """Normalize to a validated 2-D array: C-contiguous, finite, float32/64."""
    arr = np.asarray(data, dtype=None if precision is None else precision.dtype)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    arr = np.ascontiguousarray(arr)
    if not np.isfinite(arr).all():
        raise ValueError("matrix contains non-finite entries")
    return arr


def as_vector(data, precision: Precision | None = None) -> np.ndarray:
    """Normalize to a validated 1-D array (see ``as_matrix``)."""
    arr = np.asarray(data, dtype=None if precision is None else precision.dtype)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got ndim={arr.ndim}")
    arr = np.ascontiguousarray(arr)
    if not np.isfinite(arr).all():
        raise ValueError("vector contains non-finite entries")
    return arr


def _check_same_dtype(*arrays):
    dtype = arrays[0].dtype
    for arr in arrays[1:]:
        if arr.dtype != dtype:
            raise DimensionError(
                f"mixed precisions {dtype} and {arr.dtype}; cast explicitly first"
            )
    return dtype


def identity(n: int, precision: Precision = Precision.BITS64) -> np.ndarray:
    return np.eye(n, dtype=precision.dtype)


def transpose(a: np.ndarray) -> np.ndarray:
    """C-contiguous transposed copy (kernels require contiguous buffers)."""
    return np.ascontiguousarray(a.T)


def matmul(a, b) -> np.ndarray:
    _check_same_dtype(a, b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("matmul requires 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    out = np.empty((a.shape[0], b.shape[1]), dtype=a.dtype)
    kernels.matmul(a, b, out)
    return out


def matvec(a, x) -> np.ndarray:
    _check_same_dtype(a, x)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise DimensionError(f"matvec shape mismatch: {a.shape} x {x.shape}")
    out = np.empty(a.shape[0], dtype=a.dtype)
    kernels.matvec(a, x, out)
    return out


def vecmat(x, a) -> np.ndarray:
    """Row-vector product x^T A, returned as a 1-D array."""
    _check_same_dtype(x, a)
    if a.ndim != 2 or x.ndim != 1 or a.shape[0] != x.shape[0]:
        raise DimensionError(f"vecmat shape mismatch: {x.shape} x {a.shape}")
    out = np.empty(a.shape[1], dtype=a.dtype)
    kernels.vecmat(x, a, out)
    return out


def dot(u, v):
    """Inner product accumulated in the operands' own precision."""
    _check_same_dtype(u, v)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"dot shape mismatch: {u.shape} vs {v.shape}")
    return u.dtype.type(kernels.dot(u, v))


def sum_abs(v):
    return v.dtype.type(kernels.sum_abs(v))


def max_abs(arr):
    if arr.ndim == 1:
        return arr.dtype.type(kernels.max_abs(arr))
    return arr.dtype.type(kernels.max_abs_mat(arr))


def norm2(v):
    return v.dtype.type(np.sqrt(dot(v, v)))


def inverse(a) -> np.ndarray:
    """Gauss-Jordan inverse with partial pivoting.

    Raises SingularMatrixError when the best pivot in some column falls
    below n * eps * max|entry|.
    """
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"inverse requires a square matrix, got {a.shape}")
    prec = precision_of(a)
    n = a.shape[0]
    work = a.copy()
    inv = identity(n, prec)
    tol = n * prec.eps * float(max_abs(a))
    status = kernels.invert(work, inv, tol)
    if status >= 0:
        raise SingularMatrixError(
            f"matrix singular to working precision (no pivot in column {status})"
        )
    if not np.isfinite(inv).all():
        raise SingularMatrixError("inverse overflowed working precision")
    return inv


def pinv_wide(y) -> np.ndarray:
    """Right pseudo-inverse Y^T (Y Y^T)^-1 of a wide full-row-rank matrix."""
    if y.ndim != 2 or y.shape[0] > y.shape[1]:
        raise DimensionError(f"pinv_wide requires rows <= cols, got {y.shape}")
    gram = matmul(y, transpose(y))
    try:
        gram_inv = inverse(gram)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"rows are not linearly independent: {exc}") from exc
    return matmul(transpose(y), gram_inv)


def qr_thin(a) -> np.ndarray:
    """Thin Q of a Householder QR, with the implicit R diagonal nonnegative.

    ``a`` must be n x m with n >= m and full column rank; the returned Q is
    n x m with orthonormal columns spanning the columns of ``a``.
    """
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise DimensionError(f"qr_thin requires rows >= cols, got {a.shape}")
    prec = precision_of(a)
    n, m = a.shape
    work = a.copy()
    q = np.empty((n, m), dtype=a.dtype)
    vhead = np.empty(m, dtype=a.dtype)
    rdiag = np.empty(m, dtype=a.dtype)
    tol = max(n, m) * prec.eps * float(max_abs(a))
    status = kernels.qr_thin(work, q, vhead, rdiag, tol)
    if status >= 0:
        raise RankDeficientError(
            f"rank deficiency detected at column {status} (norm below {tol:g})"
        )
    return q
