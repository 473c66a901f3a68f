"""Gaussian elimination with no pivoting, block elimination, and randomized rescue."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .kernels import add_flops, as_matrix, matmul
from .preprocess import Multiplier, MultiplierSpec, apply_mult, derive_seed

__all__ = [
    "LuFactors",
    "PivotBreakdown",
    "PreprocessedSolve",
    "block_ge",
    "genp",
    "genp_preprocessed",
    "lu_solve",
    "solve_preprocessed",
]


class PivotBreakdown(ArithmeticError):
    """Elimination met a (numerically) singular pivot or pivot block."""

    def __init__(self, step: int, panel: int, size: float):
        super().__init__(f"pivot breakdown at step {step} (panel {panel}): pivot size {size:.3e}")
        self.step = step
        self.panel = panel
        self.size = size


@dataclass
class LuFactors:
    """``A = L @ U``.

    ``L`` is unit lower triangular. For ``genp`` ``U`` is upper triangular;
    for ``block_ge`` with block ``p`` the diagonal blocks of ``U`` are the
    ``p x p`` pivot blocks and ``L`` has identity diagonal blocks.
    """

    L: np.ndarray
    U: np.ndarray
    growth: float
    block: int = 1


def _eliminate(A, block: int, pivot_tol: float) -> LuFactors:
    A = as_matrix(A)
    n, n2 = A.shape
    if n != n2:
        raise ValueError(f"elimination needs a square matrix, got {A.shape}")
    if not 1 <= block <= n:
        raise ValueError(f"block size {block} out of range [1, {n}]")
    amax = float(np.max(np.abs(A)))
    S = A.copy()
    L = np.eye(n)
    biggest = amax
    for panel, p0 in enumerate(range(0, n, block)):
        p1 = min(p0 + block, n)
        p = p1 - p0
        A11 = S[p0:p1, p0:p1]
        size = abs(A11[0, 0]) if p == 1 else float(np.linalg.svd(A11, compute_uv=False)[-1])
        if size < pivot_tol * amax or size == 0.0:
            raise PivotBreakdown(p0, panel, size)
        if p1 == n:
            break
        A21 = S[p1:, p0:p1]
        A12 = S[p0:p1, p1:]
        if p == 1:
            L21 = A21 / A11[0, 0]
        else:
            L21 = np.linalg.solve(A11.T, A21.T).T
        add_flops((p - 1) * p * (2 * p - 1) // 6 + p * (p - 1) // 2 + (n - p1) * p * p)
        L[p1:, p0:p1] = L21
        S[p1:, p1:] -= matmul(L21, A12)
        S[p1:, p0:p1] = 0.0
        biggest = max(biggest, float(np.max(np.abs(S[p1:, p1:]))))
    return LuFactors(L, S, biggest / amax if amax > 0 else np.inf, block)


def genp(A, pivot_tol: float = 1e-12) -> LuFactors:
    """LU without row exchanges.

    Raises :class:`PivotBreakdown` naming the step where
    ``|pivot| < pivot_tol * max|A|``. ``growth`` is the largest magnitude met
    in any Schur complement over ``max|A|``.
    """
    return _eliminate(A, 1, pivot_tol)


def block_ge(A, block: int, pivot_tol: float = 1e-12) -> LuFactors:
    """Block elimination with ``block x block`` pivot blocks.

    A panel fails when the smallest singular value of its pivot block is
    below ``pivot_tol * max|A|``. ``block=1`` runs exactly the ``genp`` steps.
    """
    return _eliminate(A, block, pivot_tol)


def lu_solve(lu: LuFactors, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=np.float64)
    n = lu.L.shape[0]
    add_flops(n * n)
    y = solve_triangular(lu.L, rhs, lower=True, unit_diagonal=True)
    if lu.block == 1:
        return solve_triangular(lu.U, y, lower=False)
    return np.linalg.solve(lu.U, y)


@dataclass
class PreprocessedSolve:
    x: np.ndarray
    lu: LuFactors
    retries: int
    left: Multiplier
    right: Multiplier


def _multiplier(spec, n, seed):
    return spec if isinstance(spec, Multiplier) else spec.make(n, seed)


def solve_preprocessed(
    A,
    rhs,
    left=MultiplierSpec("gaussian"),
    right=MultiplierSpec("gaussian"),
    pivot_tol: float = 1e-12,
    seed: int = 0,
) -> PreprocessedSolve:
    """Solve ``A x = rhs`` through GENP on ``F A H``.

    Factors ``F A H = L U``, solves ``L U y = F rhs`` and returns ``x = H y``.
    A breakdown is retried once with multipliers drawn from a fresh seed.
    Multiplier seeds are ``derive_seed(seed, side, attempt)`` with side 1
    for ``F`` and 2 for ``H``.
    """
    A = as_matrix(A, "A")
    n = A.shape[0]
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != n:
        raise ValueError(f"rhs length {rhs.shape[0]} does not match {n}")
    for attempt in range(2):
        F = _multiplier(left, n, derive_seed(seed, 1, attempt))
        H = _multiplier(right, n, derive_seed(seed, 2, attempt))
        Ap = apply_mult(H, apply_mult(F, A, "left"), "right")
        try:
            lu = genp(Ap, pivot_tol)
        except PivotBreakdown:
            if attempt == 1:
                raise
            continue
        y = lu_solve(lu, apply_mult(F, rhs, "left"))
        x = apply_mult(H, y, "left")
        return PreprocessedSolve(x, lu, attempt, F, H)
    raise AssertionError("unreachable")


def genp_preprocessed(A, rhs, left=MultiplierSpec("gaussian"), right=MultiplierSpec("gaussian"),
                      pivot_tol: float = 1e-12, seed: int = 0) -> np.ndarray:
    return solve_preprocessed(A, rhs, left, right, pivot_tol, seed).x
