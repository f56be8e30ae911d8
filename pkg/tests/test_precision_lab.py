import numpy as np
import pytest

from mmcal import phantoms
from mmcal.mismatch import lambda_vector, mismatch_solution, sigma_special
from mmcal.precision import Precision
from mmcal.precision_lab import run_precision_study
from mmcal.rng import gaussian_matrix

from conftest import gauss


@pytest.fixture(scope="module")
def study():
    a = gaussian_matrix(60, 144, 1)
    a_u = gaussian_matrix(60, 144, 2)
    x_prime = phantoms.phantom("blobs", 12, 12)
    x_other = phantoms.phantom("checker", 12, 12)
    return run_precision_study(a, a_u, x_prime, x_other, epochs=50)


def by_cell(reports, algorithm, precision):
    for r in reports:
        if r.algorithm == algorithm and r.precision is precision:
            return r
    raise KeyError((algorithm, precision))


def test_all_cells_complete(study):
    assert len(study) == 6
    assert all(r.ok for r in study)


def test_matching_holds_in_every_cell(study):
    """The matching property survives precision loss in every cell."""
    for r in study:
        assert r.match_residual <= r.match_floor, (r.algorithm, r.precision)


def test_calibration_ratio_spread_dominates(study):
    """Full calibration shows order-one ratio spread; the iterative
    constructors at 64-bit sit at machine-epsilon scale."""
    alg1_64 = by_cell(study, "alg1", Precision.BITS64)
    for prec in (Precision.BITS32, Precision.BITS64):
        alg3 = by_cell(study, "alg3", prec)
        assert alg3.lambda_std >= 10.0 * alg1_64.lambda_std
        assert alg3.lambda_range >= 10.0 * alg1_64.lambda_range


def test_precision_orders_ratio_spread(study):
    for alg in ("alg1", "alg2"):
        r32 = by_cell(study, alg, Precision.BITS32)
        r64 = by_cell(study, alg, Precision.BITS64)
        assert r32.lambda_range >= r64.lambda_range


def test_single_rank_one_constant_at_both_precisions():
    """One rank-one solution: ratio spread bounded by 100 eps at each width."""
    for prec in (Precision.BITS32, Precision.BITS64):
        dt = prec.dtype
        a = gaussian_matrix(40, 100, 5, dt)
        pm = np.full(100, 0.5, dtype=dt)
        y0 = np.ascontiguousarray(a @ pm.astype(dt), dtype=dt)
        y = gaussian_matrix(1, 40, 6, dt)[0]
        sol = mismatch_solution(y0, y, sigma_special(a), a)
        xp = phantoms.phantom("blobs", 10, 10, prec)
        xo = phantoms.phantom("checker", 10, 10, prec)
        stats = lambda_vector(sol.a_recv, xp, xo, drop_small=True)
        assert stats.range <= 100.0 * prec.eps * abs(stats.mean)


def test_failed_cell_reported_not_fatal():
    a = gaussian_matrix(20, 50, 7)
    a[5] = a[4]  # known matrix loses row rank: every cell must fail softly
    a_u = gaussian_matrix(20, 50, 8)
    xp = phantoms.phantom("blobs", 5, 10)
    xo = phantoms.phantom("checker", 5, 10)
    reports = run_precision_study(a, a_u, xp, xo,
                                  precisions=(Precision.BITS64,), epochs=5)
    assert len(reports) == 3
    assert all(not r.ok and r.message for r in reports)


def test_identical_images_rejected():
    a = gaussian_matrix(20, 50, 9)
    xp = phantoms.phantom("blobs", 5, 10)
    with pytest.raises(ValueError):
        run_precision_study(a, a, xp, xp)
