import math

import numpy as np
import pytest

from mmcal import linalg, phantoms
from mmcal.calibration import (
    BasisProvenance,
    GroupDescriptor,
    MatrixOracle,
    calibrate_mspace,
    calibrate_ndim_grouped,
    coordinates,
    embed_images_in_space,
    sigma_from_premeasure,
)
from mmcal.errors import DimensionError, RankDeficientError, SingularMatrixError
from mmcal.measurement import NOISELESS, NoiseModel, measure, residual_error
from mmcal.rng import gaussian_matrix

from conftest import gauss, orthonormal_rows


class TestSigmaFromPremeasure:
    def test_orthonormal_rows(self):
        r = np.random.default_rng(1)
        y = orthonormal_rows(r, 4, 9)
        sigma = sigma_from_premeasure(y)
        np.testing.assert_allclose(y @ sigma @ y.T, np.eye(4), atol=1e-12)

    def test_scaled_rows_cancel(self):
        r = np.random.default_rng(2)
        y = 3.0 * orthonormal_rows(r, 4, 9)
        sigma = sigma_from_premeasure(y)
        np.testing.assert_allclose(y @ sigma @ y.T, np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_condition_random_wide(self, seed):
        r = np.random.default_rng(10 + seed)
        y = gauss(r, (6, 10))
        sigma = sigma_from_premeasure(y)
        assert np.abs(y @ sigma @ y.T - np.eye(6)).max() <= 1e-8

    def test_rank_deficient_raises(self):
        y = np.ones((3, 8))
        with pytest.raises(SingularMatrixError):
            sigma_from_premeasure(y)

    def test_tall_rejected(self):
        with pytest.raises(DimensionError):
            sigma_from_premeasure(np.ones((5, 3)))


def mspace_instance(seed, m=40, n=100):
    a = gaussian_matrix(m, n, 3 * seed + 1)
    a_u = gaussian_matrix(m, n, 3 * seed + 2)
    return a, a_u


class TestCalibrateMspace:
    def test_in_span_exact_noiseless(self):
        a, a_u = mspace_instance(1)
        result = calibrate_mspace(a, MatrixOracle(a_u))
        r = np.random.default_rng(5)
        for _ in range(5):
            x = linalg.matvec(result.basis.q, gauss(r, (40,)))
            err = residual_error(measure(a_u, x, NOISELESS),
                                 linalg.matvec(result.a_recv, x))
            assert err <= 1e-8

    def test_out_of_span_equals_projection_oracle(self):
        a, a_u = mspace_instance(2)
        result = calibrate_mspace(a, MatrixOracle(a_u))
        q = result.basis.q
        x = phantoms.phantom("disk", 10, 10)
        lhs = residual_error(measure(a_u, x, NOISELESS),
                             linalg.matvec(result.a_recv, x))
        x_proj = linalg.matvec(q, linalg.vecmat(x, q))
        rhs = residual_error(linalg.matvec(a_u, x), linalg.matvec(a_u, x_proj))
        assert abs(lhs - rhs) <= 1e-8
        assert lhs > 0

    def test_basis_column_maps_to_measured_column(self):
        a, a_u = mspace_instance(3)
        oracle = MatrixOracle(a_u)
        result = calibrate_mspace(a, oracle)
        j = 7
        x = np.ascontiguousarray(result.basis.q[:, j])
        expected = oracle.records[j].y
        assert np.abs(linalg.matvec(result.a_recv, x) - expected).max() <= 1e-8

    def test_measurement_budget_is_m(self):
        a, a_u = mspace_instance(4)
        oracle = MatrixOracle(a_u)
        result = calibrate_mspace(a, oracle)
        assert result.unknown_measure_count == 40 == oracle.measure_count

    def test_one_calibration_many_images(self):
        """Contrast with the per-image matched solution: one result serves all."""
        a, a_u = mspace_instance(5)
        result = calibrate_mspace(a, MatrixOracle(a_u))
        r = np.random.default_rng(6)
        errs = [residual_error(measure(a_u, x, NOISELESS), linalg.matvec(result.a_recv, x))
                for x in (linalg.matvec(result.basis.q, gauss(r, (40,))) for _ in range(8))]
        assert max(errs) <= 1e-8

    def test_cross_multiplier_kronecker_structure(self):
        """Cross multipliers collapse: y0_j^T S y0_i is 1 at i=j else 0."""
        a, a_u = mspace_instance(6)
        result = calibrate_mspace(a, MatrixOracle(a_u))
        y_pre = linalg.matmul(a, result.basis.q)
        gram = y_pre.T @ result.sigma @ y_pre
        assert np.abs(gram - np.eye(40)).max() <= 1e-8


class TestCoordinates:
    def test_basis_vector_roundtrip(self):
        a, a_u = mspace_instance(7)
        result = calibrate_mspace(a, MatrixOracle(a_u))
        e3 = np.zeros(40)
        e3[3] = 1.0
        x = linalg.matvec(result.basis.q, e3)
        coord = coordinates(result.basis, x)
        np.testing.assert_allclose(coord.b, e3, atol=1e-12)
        assert coord.in_span

    def test_orthogonal_image_not_in_span(self):
        a, a_u = mspace_instance(8)
        result = calibrate_mspace(a, MatrixOracle(a_u))
        q = result.basis.q
        r = np.random.default_rng(9)
        x = gauss(r, (100,))
        x -= linalg.matvec(q, linalg.vecmat(x, q))  # project out the span
        coord = coordinates(result.basis, x)
        assert not coord.in_span
        assert np.abs(coord.b).max() <= 1e-10 * np.abs(x).max() * 100

    def test_least_squares_local_optimality(self):
        a, a_u = mspace_instance(9)
        result = calibrate_mspace(a, MatrixOracle(a_u))
        r = np.random.default_rng(10)
        x = np.ascontiguousarray(r.uniform(0, 1, 100))
        coord = coordinates(result.basis, x)
        best = np.linalg.norm(x - result.basis.q @ coord.b)
        for _ in range(25):
            delta = gauss(r, (40,), scale=1e-3)
            assert np.linalg.norm(x - result.basis.q @ (coord.b + delta)) >= best


class TestEmbedImages:
    def test_embed_none_returns_copy(self):
        a, _ = mspace_instance(10)
        out = embed_images_in_space(a, [])
        assert np.array_equal(out, a) and out is not a

    def test_embed_one_image_in_span(self):
        a, a_u = mspace_instance(11)
        img = phantoms.phantom("cross", 10, 10)
        result = calibrate_mspace(a, MatrixOracle(a_u), images_in_span=[img])
        assert result.basis.provenance is BasisProvenance.QR_WITH_EMBEDDED_IMAGES
        assert coordinates(result.basis, img).in_span

    def test_embed_three_images_exp_analog(self):
        """Embedded images are in-span; a held-out fourth is not."""
        a, a_u = mspace_instance(12)
        names = ("disk", "rings", "checker")
        imgs = [phantoms.phantom(nm, 10, 10) for nm in names]
        result = calibrate_mspace(a, MatrixOracle(a_u), images_in_span=imgs)
        for img in imgs:
            assert coordinates(result.basis, img).in_span
        held_out = phantoms.phantom("gradient", 10, 10)
        assert not coordinates(result.basis, held_out).in_span

    def test_embedded_images_match_exactly(self):
        a, a_u = mspace_instance(13)
        img = phantoms.phantom("stripes", 10, 10)
        result = calibrate_mspace(a, MatrixOracle(a_u), images_in_span=[img])
        err = residual_error(measure(a_u, img, NOISELESS),
                             linalg.matvec(result.a_recv, img))
        assert err <= 1e-8

    def test_duplicate_images_rank_deficient(self):
        a, _ = mspace_instance(14)
        img = phantoms.phantom("disk", 10, 10)
        with pytest.raises(RankDeficientError):
            embed_images_in_space(a, [img, img])

    def test_too_many_images_rejected(self):
        a, _ = mspace_instance(15)
        imgs = [phantoms.phantom("disk", 10, 10)] * 41
        with pytest.raises(DimensionError):
            embed_images_in_space(a, imgs)


class TestGroupedCalibration:
    def test_noiseless_exactness_desk_scale(self):
        a = gaussian_matrix(16, 64, 100)
        a_u = gaussian_matrix(16, 64, 101)
        oracle = MatrixOracle(a_u)
        result = calibrate_ndim_grouped(a, oracle)
        assert np.abs(result.a_recv - a_u).max() <= 1e-7
        assert result.unknown_measure_count == 64 == oracle.measure_count

    def test_group_descriptor_partitions(self):
        a = gaussian_matrix(16, 40, 102)
        a_u = gaussian_matrix(16, 40, 103)
        result = calibrate_ndim_grouped(a, MatrixOracle(a_u))
        assert isinstance(result.basis, GroupDescriptor)
        assert result.basis.group_ranges == ((0, 16), (16, 32), (32, 40))
        assert len(result.group_sigmas) == 3

    def test_single_group_when_n_at_most_m(self):
        """Degenerate grouping: n <= m collapses to one group, still exact."""
        a = gaussian_matrix(24, 16, 104)
        a_u = gaussian_matrix(24, 16, 105)
        result = calibrate_ndim_grouped(a, MatrixOracle(a_u))
        assert result.basis.group_ranges == ((0, 16),)
        assert np.abs(result.a_recv - a_u).max() <= 1e-7

    def test_remainder_group(self):
        """A trailing group narrower than m keeps the scheme exact."""
        a = gaussian_matrix(24, 25, 113)
        a_u = gaussian_matrix(24, 25, 114)
        result = calibrate_ndim_grouped(a, MatrixOracle(a_u))
        assert result.basis.group_ranges == ((0, 24), (24, 25))
        assert np.abs(result.a_recv - a_u).max() <= 1e-7

    def test_group_sigma_condition(self):
        a = gaussian_matrix(16, 64, 106)
        a_u = gaussian_matrix(16, 64, 107)
        result = calibrate_ndim_grouped(a, MatrixOracle(a_u))
        for (lo, hi), sigma in zip(result.basis.group_ranges, result.group_sigmas):
            y_rows = np.ascontiguousarray(a[:, lo:hi].T)
            cond = y_rows @ sigma @ y_rows.T
            assert np.abs(cond - np.eye(hi - lo)).max() <= 1e-8

    def test_noise_amplification_measured_not_asserted(self):
        """Column errors scale with the per-measurement noise floor; the
        amplification factor is reported, only sanity-bounded here."""
        sigma_noise = 0.5
        a = gaussian_matrix(16, 64, 108)
        a_u = gaussian_matrix(16, 64, 109)
        oracle = MatrixOracle(a_u, NoiseModel(sigma_noise, 110))
        result = calibrate_ndim_grouped(a, oracle)
        col_err = float(np.abs(result.a_recv - a_u).mean())
        floor = sigma_noise * math.sqrt(2.0 / math.pi)
        amplification = col_err / floor
        print(f"grouped-calibration noise amplification: {amplification:.3f}")
        assert 0.05 <= amplification <= 50.0

    def test_rank_deficient_group_identified(self):
        a = gaussian_matrix(8, 24, 111)
        a[:, 9] = a[:, 10]  # second group gets two identical pre-measure columns
        with pytest.raises(SingularMatrixError) as err:
            calibrate_ndim_grouped(a, MatrixOracle(gaussian_matrix(8, 24, 112)))
        assert "group 1" in str(err.value)
