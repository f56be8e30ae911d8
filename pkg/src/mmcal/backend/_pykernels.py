"""Pure-Python kernel twins, bit-compatible with the compiled core.

Same loops, same operation order, same rounding: numpy scalar arithmetic
performs one correctly rounded IEEE operation at a time, exactly like the
C the compiled backend is built from (FP contraction off). Orders of
magnitude slower; selected only when the extension is unavailable or
``MMCAL_BACKEND=python`` is set.
"""

import numpy as np


def matmul(a, b, out):
    m, p = a.shape
    n = b.shape[1]
    zero = a.dtype.type(0)
    for i in range(m):
        for j in range(n):
            acc = zero
            for k in range(p):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


def matvec(a, x, out):
    m, n = a.shape
    zero = a.dtype.type(0)
    for i in range(m):
        acc = zero
        for j in range(n):
            acc = acc + a[i, j] * x[j]
        out[i] = acc


def vecmat(x, a, out):
    m, n = a.shape
    zero = a.dtype.type(0)
    for j in range(n):
        acc = zero
        for i in range(m):
            acc = acc + x[i] * a[i, j]
        out[j] = acc


def dot(u, v):
    acc = u.dtype.type(0)
    for i in range(u.shape[0]):
        acc = acc + u[i] * v[i]
    return acc


def sum_abs(v):
    acc = v.dtype.type(0)
    for i in range(v.shape[0]):
        t = v[i]
        if t < 0:
            t = -t
        acc = acc + t
    return acc


def max_abs(v):
    best = v.dtype.type(0)
    for i in range(v.shape[0]):
        t = v[i]
        if t < 0:
            t = -t
        if t > best:
            best = t
    return best


def max_abs_mat(a):
    m, n = a.shape
    best = a.dtype.type(0)
    for i in range(m):
        for j in range(n):
            t = a[i, j]
            if t < 0:
                t = -t
            if t > best:
                best = t
    return best


def invert(a, inv, tol):
    """Gauss-Jordan with partial pivoting; twin of ``_core.invert``."""
    n = a.shape[0]
    for k in range(n):
        piv = k
        best = a[k, k]
        if best < 0:
            best = -best
        for i in range(k + 1, n):
            cur = a[i, k]
            if cur < 0:
                cur = -cur
            if cur > best:
                best = cur
                piv = i
        if best <= tol:
            return k
        if piv != k:
            for j in range(n):
                a[k, j], a[piv, j] = a[piv, j], a[k, j]
                inv[k, j], inv[piv, j] = inv[piv, j], inv[k, j]
        pivval = a[k, k]
        for j in range(n):
            a[k, j] = a[k, j] / pivval
        for j in range(n):
            inv[k, j] = inv[k, j] / pivval
        for i in range(n):
            if i == k:
                continue
            factor = a[i, k]
            if factor != 0:
                for j in range(n):
                    a[i, j] = a[i, j] - factor * a[k, j]
                for j in range(n):
                    inv[i, j] = inv[i, j] - factor * inv[k, j]
    return -1


def qr_thin(work, q, vhead, rdiag, tol):
    """Householder thin-Q; twin of ``_core.qr_thin``."""
    n, m = work.shape
    two = work.dtype.type(2)
    for k in range(m):
        s = work.dtype.type(0)
        for i in range(k, n):
            s = s + work[i, k] * work[i, k]
        normx = np.sqrt(s)
        if normx <= tol:
            return k
        if work[k, k] >= 0:
            alpha = -normx
        else:
            alpha = normx
        v0 = work[k, k] - alpha
        vtv = v0 * v0
        for i in range(k + 1, n):
            vtv = vtv + work[i, k] * work[i, k]
        for j in range(k + 1, m):
            d = v0 * work[k, j]
            for i in range(k + 1, n):
                d = d + work[i, k] * work[i, j]
            t = two * d / vtv
            work[k, j] = work[k, j] - t * v0
            for i in range(k + 1, n):
                work[i, j] = work[i, j] - t * work[i, k]
        vhead[k] = v0
        rdiag[k] = alpha
    q[:, :] = 0
    for j in range(m):
        q[j, j] = 1
    for k in range(m - 1, -1, -1):
        v0 = vhead[k]
        vtv = v0 * v0
        for i in range(k + 1, n):
            vtv = vtv + work[i, k] * work[i, k]
        for j in range(k, m):
            d = v0 * q[k, j]
            for i in range(k + 1, n):
                d = d + work[i, k] * q[i, j]
            t = two * d / vtv
            q[k, j] = q[k, j] - t * v0
            for i in range(k + 1, n):
                q[i, j] = q[i, j] - t * work[i, k]
    for k in range(m):
        if rdiag[k] < 0:
            for i in range(n):
                q[i, k] = -q[i, k]
    return -1
