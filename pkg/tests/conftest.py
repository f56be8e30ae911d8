import numpy as np
import pytest

from mmcal import rng as mrng


def gauss(generator, shape, dtype=np.float64, scale=1.0):
    """Test-input matrix/vector from a numpy Generator (fast, seeded)."""
    arr = generator.standard_normal(shape) * scale
    return np.ascontiguousarray(arr, dtype=dtype)


def orthonormal_rows(generator, m, n, dtype=np.float64):
    """m x n matrix with exactly orthonormal rows (via numpy QR on n x m)."""
    q, _ = np.linalg.qr(generator.standard_normal((n, m)))
    return np.ascontiguousarray(q.T, dtype=dtype)


@pytest.fixture
def nprng():
    return np.random.default_rng(0xC0FFEE)


def product_matrix(m=120, n=256, seed=1, dtype=np.float64, scale=1.0):
    """Measurement matrix through the package's own seeded generator."""
    return mrng.gaussian_matrix(m, n, seed, dtype, scale=scale)
