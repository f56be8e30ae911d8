import numpy as np
import pytest

from mmcal import linalg
from mmcal.errors import DimensionError, RankDeficientError, SingularMatrixError
from mmcal.precision import Precision

from conftest import gauss, orthonormal_rows


class TestMatmul:
    def test_identity(self):
        col = np.array([[1.0], [2.0]])
        assert np.array_equal(linalg.matmul(np.eye(2), col), col)

    def test_hand_example(self):
        a = np.array([[1.0, 1.0], [1.0, -1.0]])
        b = np.array([[3.0], [1.0]])
        assert np.array_equal(linalg.matmul(a, b), np.array([[4.0], [2.0]]))

    def test_against_blas_oracle(self):
        r = np.random.default_rng(1)
        a = gauss(r, (5, 4))
        b = gauss(r, (4, 3))
        np.testing.assert_allclose(linalg.matmul(a, b), a @ b, atol=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_associativity(self, seed):
        r = np.random.default_rng(seed)
        a, b, c = gauss(r, (5, 6)), gauss(r, (6, 4)), gauss(r, (4, 3))
        left = linalg.matmul(linalg.matmul(a, b), c)
        right = linalg.matmul(a, linalg.matmul(b, c))
        np.testing.assert_allclose(left, right, rtol=1e-9, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            linalg.matmul(np.eye(2), np.eye(3))

    def test_mixed_precision_rejected(self):
        with pytest.raises(DimensionError):
            linalg.matmul(np.eye(2), np.eye(2, dtype=np.float32))

    def test_float32_stays_float32(self):
        r = np.random.default_rng(2)
        a = gauss(r, (3, 3), np.float32)
        assert linalg.matmul(a, a).dtype == np.float32


class TestInverse:
    def test_identity(self):
        assert np.array_equal(linalg.inverse(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        a = np.diag([2.0, 4.0])
        np.testing.assert_allclose(linalg.inverse(a), np.diag([0.5, 0.25]), atol=0)

    @pytest.mark.parametrize("seed", range(100))
    def test_residual_bound(self, seed):
        r = np.random.default_rng(seed)
        a = gauss(r, (6, 6)) + 6.0 * np.eye(6)
        resid = linalg.matmul(a, linalg.inverse(a)) - np.eye(6)
        assert np.abs(resid).max() <= 1e-10

    def test_singular_raises(self):
        a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 5.0]])
        with pytest.raises(SingularMatrixError):
            linalg.inverse(a)

    def test_zero_matrix_raises(self):
        with pytest.raises(SingularMatrixError):
            linalg.inverse(np.zeros((3, 3)))

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            linalg.inverse(np.ones((2, 3)))

    def test_inputs_not_mutated(self):
        a = np.eye(4) + 0.1
        before = a.copy()
        linalg.inverse(a)
        assert np.array_equal(a, before)


class TestPinvWide:
    def test_canonical_rows(self):
        y = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        expected = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(linalg.pinv_wide(y), expected, atol=1e-15)

    def test_scaling(self):
        y = np.array([[3.0, 0.0, 0.0], [0.0, 3.0, 0.0]])
        p = linalg.pinv_wide(y)
        np.testing.assert_allclose(p[:2, :], np.eye(2) / 3.0, atol=1e-15)

    @pytest.mark.parametrize("seed", range(100))
    def test_right_inverse_residual(self, seed):
        r = np.random.default_rng(1000 + seed)
        y = gauss(r, (3, 7))
        resid = linalg.matmul(y, linalg.pinv_wide(y)) - np.eye(3)
        assert np.abs(resid).max() <= 1e-10

    def test_rank_deficient_rows_raise(self):
        y = np.array([[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0]])
        with pytest.raises(SingularMatrixError):
            linalg.pinv_wide(y)

    def test_tall_rejected(self):
        with pytest.raises(DimensionError):
            linalg.pinv_wide(np.ones((4, 2)))


class TestQrThin:
    def test_orthonormal_input_reproduced(self):
        a = np.eye(3)[:, :2].copy()
        q = linalg.qr_thin(a)
        np.testing.assert_allclose(q, a, atol=1e-15)

    def test_single_column_normalization(self):
        q = linalg.qr_thin(np.array([[3.0], [4.0]]))
        np.testing.assert_allclose(q, np.array([[0.6], [0.8]]), atol=1e-15)

    @pytest.mark.parametrize("seed", range(25))
    def test_orthonormality_and_span(self, seed):
        r = np.random.default_rng(2000 + seed)
        a = gauss(r, (20, 6))
        q = linalg.qr_thin(a)
        assert np.abs(linalg.matmul(linalg.transpose(q), q) - np.eye(6)).max() <= 1e-10
        # every original column reconstructs from Q
        proj = linalg.matmul(q, linalg.matmul(linalg.transpose(q), a))
        assert np.abs(proj - a).max() <= 1e-10

    def test_sign_convention_r_diag_nonnegative(self):
        r = np.random.default_rng(7)
        a = gauss(r, (12, 5))
        q = linalg.qr_thin(a)
        r_implicit = linalg.matmul(linalg.transpose(q), a)
        assert (np.diag(r_implicit) >= 0).all()

    def test_deterministic(self):
        r = np.random.default_rng(8)
        a = gauss(r, (15, 4))
        assert np.array_equal(linalg.qr_thin(a), linalg.qr_thin(a.copy()))

    def test_rank_deficiency_raises(self):
        a = np.ones((6, 3))
        a[:, 2] = a[:, 0] + a[:, 1]
        with pytest.raises(RankDeficientError):
            linalg.qr_thin(a)

    def test_wide_rejected(self):
        with pytest.raises(DimensionError):
            linalg.qr_thin(np.ones((2, 5)))


class TestValidation:
    def test_as_matrix_rejects_nan(self):
        with pytest.raises(ValueError):
            linalg.as_matrix([[1.0, float("nan")]])

    def test_as_vector_rejects_inf(self):
        with pytest.raises(ValueError):
            linalg.as_vector([1.0, float("inf")])

    def test_as_matrix_casts_precision(self):
        m = linalg.as_matrix([[1, 2], [3, 4]], Precision.BITS32)
        assert m.dtype == np.float32 and m.flags.c_contiguous

    def test_orthonormal_rows_helper(self):
        r = np.random.default_rng(3)
        a = orthonormal_rows(r, 4, 9)
        np.testing.assert_allclose(a @ a.T, np.eye(4), atol=1e-12)
