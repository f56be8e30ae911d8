"""Replacement measurement matrices for mismatched compressed sensing.

A measurement value produced by an unknown matrix cannot be inverted with
the matrix you have. This package constructs matrices that can: per-image
matched solutions built iteratively from rank-one corrections, and full
calibrations assembled from basis-image measurements, verified end to end
with an l1 sparse-recovery solver. All numerics run in an explicitly
selected 32- or 64-bit precision on top of a compiled kernel core with a
bit-identical pure-Python fallback.
"""

from .backend import active_backend
from .calibration import (
    BasisProvenance,
    CalibrationBasis,
    CalibrationResult,
    Coordinates,
    GroupDescriptor,
    MatrixOracle,
    calibrate_mspace,
    calibrate_ndim_grouped,
    coordinates,
    embed_images_in_space,
    sigma_from_premeasure,
)
from .config import ExperimentConfig, PMImage
from .errors import (
    DegenerateDenominatorError,
    DimensionError,
    MmcalError,
    ParseError,
    RankDeficientError,
    SingularMatrixError,
)
from .linalg import (
    as_matrix,
    as_vector,
    inverse,
    matmul,
    matvec,
    pinv_wide,
    qr_thin,
    vecmat,
)
from .matched import (
    ImageOracle,
    IterationTrace,
    MatchedSolutionResult,
    algorithm1,
    algorithm2,
    construct_initial,
    scale_coefficient,
)
from .measurement import NOISELESS, MeasurementRecord, NoiseModel, measure, psnr, residual_error
from .mismatch import (
    ConvergenceCoefficient,
    LambdaStats,
    MismatchSolution,
    k_epsilon,
    lambda_vector,
    mismatch_solution,
    multiplier_k,
    sigma_special,
)
from .precision import Precision
from .precision_lab import PrecisionReport, run_precision_study
from .recovery import RecoveryConfig, estimate_lipschitz, fista_l1, soft_threshold

__version__ = "0.1.0"
