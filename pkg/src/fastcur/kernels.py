"""Dense linear-algebra primitives with flop accounting.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Every kernel
reports the number of multiply-add pairs it performs to the active
:class:`FlopCounter`. ``matmul`` is counted exactly; the factorizations
(pivoted QR, SVD, LU) report an operation-count model of the algorithm they
run, documented next to each kernel.

Flop counters nest: :func:`counting` opens a child counter whose increments
also propagate to every enclosing counter, so a caller can measure a stage of
a pipeline while the pipeline total keeps accumulating. The active counter
lives in a :class:`contextvars.ContextVar`, so concurrent runs started in
separate contexts keep separate exact totals.
"""

from __future__ import annotations

import contextlib
import contextvars
import threading
from typing import Iterator

import numpy as np

__all__ = [
    "FlopCounter",
    "GLOBAL_COUNTER",
    "add_flops",
    "as_matrix",
    "counting",
    "current_counter",
    "make_rng",
    "matmul",
    "pinv_trunc",
    "qr_cp",
    "spectral_norm_est",
    "truncated_svd",
    "volume",
]


class FlopCounter:
    """Thread-safe tally of multiply-add pairs."""

    def __init__(self, parent: FlopCounter | None = None):
        self._count = 0
        self._lock = threading.Lock()
        self.parent = parent

    @property
    def count(self) -> int:
        return self._count

    def add(self, n: int) -> None:
        if n < 0:
            raise ValueError("flop increments must be non-negative")
        n = int(n)
        node = self
        while node is not None:
            with node._lock:
                node._count += n
            node = node.parent

    def reset(self) -> None:
        with self._lock:
            self._count = 0

    def __repr__(self) -> str:
        return f"FlopCounter(count={self._count})"


GLOBAL_COUNTER = FlopCounter()
_active: contextvars.ContextVar[FlopCounter | None] = contextvars.ContextVar(
    "fastcur_flop_counter", default=None
)


def current_counter() -> FlopCounter:
    counter = _active.get()
    return GLOBAL_COUNTER if counter is None else counter


def add_flops(n: int) -> None:
    current_counter().add(n)


@contextlib.contextmanager
def counting() -> Iterator[FlopCounter]:
    """Open a fresh counter nested under the currently active one."""
    counter = FlopCounter(parent=current_counter())
    token = _active.set(counter)
    try:
        yield counter
    finally:
        _active.reset(token)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator seeded with a 64-bit integer.

    numpy's PCG64 stream and its ``standard_normal``/``choice``/``permutation``
    samplers are platform independent, which makes seeded runs reproducible
    bit-for-bit across machines.
    """
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D, non-empty, finite float64 array."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix product counted as ``rows(A) * cols(A) * cols(B)`` flops.

    ``B`` may be 1-D, in which case it is treated as a single column.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim not in (1, 2):
        raise ValueError(f"matmul expects a matrix and a matrix/vector, got {A.shape}, {B.shape}")
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} @ {B.shape}")
    ncols = 1 if B.ndim == 1 else B.shape[1]
    out = A @ B
    add_flops(A.shape[0] * A.shape[1] * ncols)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("matmul produced non-finite entries")
    return out


def qr_cp(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Householder QR with column pivoting.

    Returns ``(Q, R, perm)`` with ``A[:, perm] == Q @ R``, ``Q`` of shape
    ``(m, p)`` with orthonormal columns and ``R`` of shape ``(p, n)`` upper
    triangular, ``p = min(m, n)``. At each step the trailing column of largest
    norm is pivoted in; ties go to the lowest index. Trailing norms are
    recomputed rather than downdated.

    Flop model: at step ``j`` the norms and the reflector application cost
    ``3 (m-j)(n-j)``; forming ``Q`` costs ``2 (m-j) p``.
    """
    A = as_matrix(A)
    m, n = A.shape
    p = min(m, n)
    R = A.copy()
    perm = np.arange(n)
    reflectors: list[np.ndarray | None] = []
    flops = 0
    for j in range(p):
        tail = R[j:, j:]
        norms = np.einsum("ij,ij->j", tail, tail)
        q = j + int(np.argmax(norms))
        if q != j:
            R[:, [j, q]] = R[:, [q, j]]
            perm[[j, q]] = perm[[q, j]]
        x = R[j:, j]
        xnorm = float(np.sqrt(norms[q - j]))
        flops += 3 * (m - j) * (n - j)
        if xnorm == 0.0:
            reflectors.append(None)
            continue
        alpha = -xnorm if x[0] >= 0 else xnorm
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        R[j:, j:] -= 2.0 * np.outer(v, v @ R[j:, j:])
        R[j, j] = alpha
        R[j + 1 :, j] = 0.0
        reflectors.append(v)

    Q = np.eye(m, p)
    for j in range(p - 1, -1, -1):
        v = reflectors[j]
        if v is None:
            continue
        Q[j:, :] -= 2.0 * np.outer(v, v @ Q[j:, :])
        flops += 2 * (m - j) * p
    add_flops(flops)
    return Q, np.triu(R[:p, :]), perm


def _svd_flops(m: int, n: int) -> int:
    p = min(m, n)
    return 2 * m * n * p + 4 * p**3


def truncated_svd(A, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Leading ``r`` singular triplets ``(Ur, S, Vr)`` of ``A``.

    ``A ~= Ur @ diag(S) @ Vr.T``. Backed by LAPACK's ``gesdd`` through numpy;
    flop model ``2 m n p + 4 p^3`` with ``p = min(m, n)``.
    """
    A = as_matrix(A)
    m, n = A.shape
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank r={r} out of range [1, {min(m, n)}]")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    add_flops(_svd_flops(m, n))
    return U[:, :r], s[:r], Vt[:r, :].T


def pinv_trunc(A, r: int, tol: float = 1e-10) -> np.ndarray:
    """Rank-``r`` pseudo-inverse, dropping singular values ``<= tol * s1``.

    An all-zero input yields the zero matrix of transposed shape.
    """
    A = as_matrix(A)
    m, n = A.shape
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank r={r} out of range [1, {min(m, n)}]")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    Ur, s, Vr = truncated_svd(A, r)
    if s[0] == 0.0:
        return np.zeros((n, m))
    keep = s > tol * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return matmul(Vr * inv, Ur.T)


def spectral_norm_est(A, iters: int = 50, seed: int = 0) -> float:
    """Power-iteration estimate of the largest singular value.

    Returns ``||A v||`` for a unit vector ``v``, so the estimate never exceeds
    the true spectral norm beyond rounding.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("spectral_norm_est expects a matrix")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    v = make_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = matmul(A.T, matmul(A, v))
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
    return float(np.linalg.norm(matmul(A, v)))


def volume(A) -> float:
    """``|det A|`` of a square matrix via partially pivoted LU (``n^3/3`` flops)."""
    A = as_matrix(A)
    n, n2 = A.shape
    if n != n2:
        raise ValueError(f"volume needs a square matrix, got {A.shape}")
    sign, logdet = np.linalg.slogdet(A)
    add_flops(n**3 // 3)
    if sign == 0:
        return 0.0
    return float(np.exp(logdet))
