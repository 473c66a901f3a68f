"""Row and column selection: maxvol and pivoted-QR skeletons."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import add_flops, as_matrix, qr_cp, volume

__all__ = [
    "RANK_TOL",
    "MaxvolResult",
    "RankDeficientError",
    "SelectResult",
    "maxvol",
    "numerical_rank",
    "select_rc",
]

RANK_TOL = 1e-12


class RankDeficientError(ValueError):
    """Raised when a matrix lacks the column rank an operation needs."""

    def __init__(self, rank: int, required: int):
        super().__init__(f"numerical rank {rank} is below the required rank {required}")
        self.rank = rank
        self.required = required


def numerical_rank(R: np.ndarray, tol: float = RANK_TOL) -> int:
    """Count pivots of a pivoted-QR ``R`` with ``|R[i,i]| >= tol * |R[0,0]|``."""
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return 0
    # Pivoted QR diagonals are non-increasing, so the first failure ends the run.
    below = np.nonzero(d < tol * d[0])[0]
    return int(below[0]) if below.size else int(d.size)


@dataclass
class MaxvolResult:
    rows: np.ndarray
    converged: bool
    n_swaps: int
    coefficients: np.ndarray
    history: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def dominance(self) -> float:
        return float(np.max(np.abs(self.coefficients)))


def maxvol(
    A, delta: float = 0.01, max_iters: int | None = None, start=None
) -> MaxvolResult:
    """Find ``r`` rows of a tall ``n x r`` matrix spanning a dominant submatrix.

    Starts from the row pivots of ``qr_cp(A.T)`` and greedily swaps in the
    entry of largest modulus of ``B = A @ inv(A[rows])`` until every entry
    satisfies ``|B| <= 1 + delta`` or ``max_iters`` swaps (default ``10 r``)
    were made. Each swap multiplies ``|det A[rows]|`` by ``|B[i, j]|``.

    ``B`` is kept current with rank-one updates (``n r`` flops per swap) and
    recomputed from scratch before convergence is declared.

    ``start`` warm-starts from a given nonsingular row set instead of the
    pivoted-QR rows; the returned volume is then at least the start volume.
    """
    A = as_matrix(A)
    n, r = A.shape
    if n < r:
        raise ValueError(f"maxvol needs a tall matrix, got {A.shape}")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if max_iters is None:
        max_iters = 10 * r
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    _, R, perm = qr_cp(A.T)
    rank = numerical_rank(R)
    if rank < r:
        raise RankDeficientError(rank, r)
    rows = perm[:r].copy()
    if start is not None:
        start = np.asarray(start, dtype=np.intp).copy()
        if start.shape != (r,) or np.unique(start).size != r:
            raise ValueError("start must hold r distinct row indices")
        if volume(A[start]) > 0.0:
            rows = start

    def coefficients(rows):
        # B = A inv(A[rows]), via B^T = solve(A[rows]^T, A^T)
        add_flops(r**3 // 3 + n * r * r)
        return np.linalg.solve(A[rows].T, A.T).T

    B = coefficients(rows)
    fresh = True
    history = [tuple(int(i) for i in rows)]
    swaps = 0
    bound = 1.0 + delta
    while True:
        i, j = divmod(int(np.argmax(np.abs(B))), r)
        if abs(B[i, j]) <= bound and not fresh:
            B = coefficients(rows)
            fresh = True
            i, j = divmod(int(np.argmax(np.abs(B))), r)
        if abs(B[i, j]) <= bound:
            return MaxvolResult(rows, True, swaps, B, history)
        if swaps >= max_iters:
            return MaxvolResult(rows, False, swaps, B, history)
        pivot = B[i, j]
        row = B[i].copy()
        row[j] -= 1.0
        B -= np.outer(B[:, j], row / pivot)
        add_flops(n * r)
        rows[j] = i
        fresh = False
        swaps += 1
        history.append(tuple(int(k) for k in rows))


@dataclass
class SelectResult:
    rows: np.ndarray
    cols: np.ndarray
    rank: int
    rank_deficient: bool


def select_rc(B, r: int) -> SelectResult:
    """Pick ``r`` columns then ``r`` rows of ``B`` by pivoted QR.

    Columns are the leading pivots of ``qr_cp(B)``; rows are the leading
    pivots of ``qr_cp(B[:, cols].T)``. If ``B`` has numerical rank below
    ``r`` the achievable smaller sets are returned with ``rank_deficient``
    set. At least one index is always returned so the skeleton stays
    well-formed; a zero block gives a zero middle factor downstream.
    """
    B = as_matrix(B)
    k, l = B.shape
    if not 1 <= r <= min(k, l):
        raise ValueError(f"rank r={r} out of range [1, {min(k, l)}]")
    _, Rc, cperm = qr_cp(B)
    rank = min(numerical_rank(Rc), r)
    keep = max(rank, 1)
    cols = cperm[:keep].copy()
    _, Rr, rperm = qr_cp(B[:, cols].T)
    rows = rperm[:keep].copy()
    return SelectResult(rows, cols, rank, rank < r)


def intersection_volume(W, rows, cols) -> float:
    return volume(np.asarray(W)[np.ix_(rows, cols)])
