# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: fixed-order dense loops over 32/64-bit buffers.

Every accumulation runs in the buffer's own precision and in a fixed
sequential order, so results are reproducible bit for bit -- including
against the pure-Python twin in ``_pykernels`` (the extension is built
with FP contraction disabled for exactly this reason).
"""

from libc.math cimport sqrt, sqrtf

ctypedef fused real:
    float
    double


def matmul(real[:, ::1] a, real[:, ::1] b, real[:, ::1] out):
    cdef Py_ssize_t m = a.shape[0], p = a.shape[1], n = b.shape[1]
    cdef Py_ssize_t i, j, k
    cdef real acc
    for i in range(m):
        for j in range(n):
            acc = 0
            for k in range(p):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


def matvec(real[:, ::1] a, real[::1] x, real[::1] out):
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1]
    cdef Py_ssize_t i, j
    cdef real acc
    for i in range(m):
        acc = 0
        for j in range(n):
            acc = acc + a[i, j] * x[j]
        out[i] = acc


def vecmat(real[::1] x, real[:, ::1] a, real[::1] out):
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1]
    cdef Py_ssize_t i, j
    cdef real acc
    for j in range(n):
        acc = 0
        for i in range(m):
            acc = acc + x[i] * a[i, j]
        out[j] = acc


def dot(real[::1] u, real[::1] v):
    cdef Py_ssize_t n = u.shape[0], i
    cdef real acc = 0
    for i in range(n):
        acc = acc + u[i] * v[i]
    return acc


def sum_abs(real[::1] v):
    cdef Py_ssize_t n = v.shape[0], i
    cdef real acc = 0, t
    for i in range(n):
        t = v[i]
        if t < 0:
            t = -t
        acc = acc + t
    return acc


def max_abs(real[::1] v):
    cdef Py_ssize_t n = v.shape[0], i
    cdef real best = 0, t
    for i in range(n):
        t = v[i]
        if t < 0:
            t = -t
        if t > best:
            best = t
    return best


def max_abs_mat(real[:, ::1] a):
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1]
    cdef Py_ssize_t i, j
    cdef real best = 0, t
    for i in range(m):
        for j in range(n):
            t = a[i, j]
            if t < 0:
                t = -t
            if t > best:
                best = t
    return best


def invert(real[:, ::1] a, real[:, ::1] inv, double tol):
    """Gauss-Jordan with partial pivoting.

    ``a`` (destroyed) is the matrix to invert; ``inv`` must start as the
    identity and receives the inverse. Returns -1 on success, else the
    elimination column whose best pivot magnitude was <= tol.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k, piv
    cdef real best, cur, pivval, factor, tmp
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
                tmp = a[k, j]
                a[k, j] = a[piv, j]
                a[piv, j] = tmp
                tmp = inv[k, j]
                inv[k, j] = inv[piv, j]
                inv[piv, j] = tmp
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


def qr_thin(real[:, ::1] work, real[:, ::1] q, real[::1] vhead,
            real[::1] rdiag, double tol):
    """Householder QR, thin Q only, R-diagonal kept nonnegative.

    ``work`` (n x m, n >= m, destroyed) holds the input; reflector tails
    stay below the diagonal. ``q`` receives the n x m orthonormal basis.
    Returns -1 on success, else the column whose norm fell <= tol.
    """
    cdef Py_ssize_t n = work.shape[0], m = work.shape[1]
    cdef Py_ssize_t i, j, k
    cdef real s, normx, alpha, v0, vtv, d, t
    for k in range(m):
        s = 0
        for i in range(k, n):
            s = s + work[i, k] * work[i, k]
        if real is float:
            normx = sqrtf(s)
        else:
            normx = sqrt(s)
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
            t = 2 * d / vtv
            work[k, j] = work[k, j] - t * v0
            for i in range(k + 1, n):
                work[i, j] = work[i, j] - t * work[i, k]
        vhead[k] = v0
        rdiag[k] = alpha
    for i in range(n):
        for j in range(m):
            q[i, j] = 0
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
            t = 2 * d / vtv
            q[k, j] = q[k, j] - t * v0
            for i in range(k + 1, n):
                q[i, j] = q[i, j] - t * work[i, k]
    for k in range(m):
        if rdiag[k] < 0:
            for i in range(n):
                q[i, k] = -q[i, k]
    return -1
