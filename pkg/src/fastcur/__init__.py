"""Sublinear-cost CUR and low-rank approximation of dense matrices."""

from .cur import CurFactors, apply, build, error_exact, error_sampled
from .elimination import LuFactors, PivotBreakdown, block_ge, genp, genp_preprocessed
from .inputs import GeneratorSpec, average_matrix, needle_matrix, read_matrix_market, write_matrix_market
from .kernels import FlopCounter, counting, matmul, pinv_trunc, qr_cp, spectral_norm_est, truncated_svd, volume
from .preprocess import (
    LowRankFactors,
    Multiplier,
    MultiplierSpec,
    apply_mult,
    bidiagonal_product,
    gaussian_multiplier,
    preprocessed_cur,
    solve_mult,
    sparse_col,
)
from .report import Report
from .selection import RankDeficientError, maxvol, select_rc
from .twostage import TwoStageConfig, adaptive_cur, cross_approx, two_stage_cur

__version__ = "0.1.0"
