"""CUR factors: construction, fast application, and error measurement."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .kernels import add_flops, as_matrix, make_rng, matmul, pinv_trunc, spectral_norm_est

__all__ = [
    "CurFactors",
    "apply",
    "build",
    "error_exact",
    "error_sampled",
    "sampled_residual",
]


@dataclass(frozen=True)
class CurFactors:
    """Skeleton ``W ~= W[:, cols] @ U @ W[rows, :]``.

    Only the index sets and the ``l x k`` middle factor are stored; ``C`` and
    ``R`` are gathered from ``W`` on demand.
    """

    rows: np.ndarray
    cols: np.ndarray
    U: np.ndarray
    m: int
    n: int
    r: int

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def l(self) -> int:
        return len(self.cols)

    def C(self, W) -> np.ndarray:
        return np.asarray(W)[:, self.cols]

    def R(self, W) -> np.ndarray:
        return np.asarray(W)[self.rows, :]

    def dense(self, W) -> np.ndarray:
        """Materialize ``C @ U @ R`` as ``(C @ U) @ R``."""
        return matmul(matmul(self.C(W), self.U), self.R(W))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "l": self.l,
            "r": self.r,
            "I": [int(i) for i in self.rows],
            "J": [int(j) for j in self.cols],
            "U": [float(x) for x in self.U.ravel(order="C")],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> CurFactors:
        U = np.asarray(d["U"], dtype=np.float64).reshape(d["l"], d["k"])
        return cls(
            np.asarray(d["I"], dtype=np.intp),
            np.asarray(d["J"], dtype=np.intp),
            U,
            int(d["m"]),
            int(d["n"]),
            int(d["r"]),
        )


def _check_indices(idx, dim: int, axis: str) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.intp).ravel()
    if idx.size == 0:
        raise ValueError(f"{axis} index set is empty")
    if idx.min() < 0 or idx.max() >= dim:
        raise ValueError(f"{axis} index out of range [0, {dim})")
    if np.unique(idx).size != idx.size:
        raise ValueError(f"{axis} index set has duplicates")
    return idx


def build(W, rows, cols, r: int, tol: float = 1e-10) -> CurFactors:
    """CUR factors with ``U = pinv_trunc(W[rows, cols], r, tol)``.

    Cost depends only on ``len(rows)``, ``len(cols)`` and ``r``.
    """
    W = np.asarray(W, dtype=np.float64)
    m, n = W.shape
    rows = _check_indices(rows, m, "row")
    cols = _check_indices(cols, n, "column")
    if not 1 <= r <= min(rows.size, cols.size):
        raise ValueError(f"rank r={r} out of range [1, {min(rows.size, cols.size)}]")
    U = pinv_trunc(W[np.ix_(rows, cols)], r, tol)
    return CurFactors(rows, cols, U, m, n, r)


def apply(f: CurFactors, W, x) -> np.ndarray:
    """``C @ (U @ (R @ x))`` touching only the selected rows and columns of ``W``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != f.n:
        raise ValueError(f"vector length {x.shape[0]} does not match n={f.n}")
    return matmul(f.C(W), matmul(f.U, matmul(f.R(W), x)))


def error_exact(W, f: CurFactors, norm: str = "frobenius") -> float:
    """Exact residual norm ``||W - C U R||``; O(m n l), validation only."""
    W = as_matrix(W)
    resid = W - f.dense(W)
    if norm == "frobenius":
        return float(np.linalg.norm(resid))
    if norm == "spectral":
        return spectral_norm_est(resid, iters=200, seed=0)
    raise ValueError(f"unknown norm {norm!r}")


def sampled_residual(W, f: CurFactors, cols) -> tuple[float, float]:
    """Frobenius estimates of ``||W - CUR||`` and ``||W||`` from a column sample.

    Both sums of squares are scaled by ``n / len(cols)``.
    """
    W = np.asarray(W, dtype=np.float64)
    cols = np.asarray(cols, dtype=np.intp)
    s = cols.size
    n = W.shape[1]
    Ws = W[:, cols]
    approx = matmul(f.C(W), matmul(f.U, f.R(W)[:, cols]))
    resid = Ws - approx
    add_flops(2 * Ws.size)
    scale = n / s
    err = float(np.sqrt(scale * np.einsum("ij,ij->", resid, resid)))
    nrm = float(np.sqrt(scale * np.einsum("ij,ij->", Ws, Ws)))
    return err, nrm


def sample_columns(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    if not 1 <= s <= n:
        raise ValueError(f"sample size s={s} out of range [1, {n}]")
    return np.sort(rng.choice(n, size=s, replace=False))


def error_sampled(W, f: CurFactors, s: int, seed: int) -> float:
    """Frobenius error estimate from ``s`` columns drawn without replacement.

    Exact when ``s == n``; costs O(m s l).
    """
    W = np.asarray(W, dtype=np.float64)
    cols = sample_columns(W.shape[1], s, make_rng(seed))
    return sampled_residual(W, f, cols)[0]
