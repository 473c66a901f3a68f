"""Two-stage random-submatrix CUR, its adaptive wrapper, and cross-approximation.

Stage (i) computes a CUR skeleton of a uniformly random ``k x l`` submatrix;
stage (ii) reuses the selected rows and columns as a skeleton of the whole
matrix. For fixed ``k``, ``l``, ``r`` and probe size ``s`` the cost does not
depend on ``n`` and only the probe term grows with ``m``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .cur import CurFactors, build, sample_columns, sampled_residual
from .kernels import as_matrix, counting, make_rng, qr_cp, volume
from .report import Report
from .selection import RankDeficientError, maxvol, numerical_rank, select_rc

__all__ = [
    "TwoStageConfig",
    "adaptive_cur",
    "cross_approx",
    "sample_indices",
    "two_stage_cur",
]


@dataclass(frozen=True)
class TwoStageConfig:
    k: int
    l: int
    r: int
    seed: int = 0
    tol: float = 1e-10
    s: int = 16

    def check(self, m: int, n: int) -> None:
        if not 1 <= self.r <= min(self.k, self.l):
            raise ValueError(f"need 1 <= r <= min(k, l), got r={self.r}, k={self.k}, l={self.l}")
        if self.k > m or self.l > n:
            raise ValueError(f"sample {self.k}x{self.l} exceeds matrix {m}x{n}")
        if self.s < 1:
            raise ValueError("probe size s must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")


def sample_indices(dim: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform ``size``-subset of ``range(dim)``, sorted."""
    return np.sort(rng.choice(dim, size=size, replace=False))


def _rel(err: float, nrm: float) -> float:
    if nrm == 0.0:
        return 0.0 if err == 0.0 else float("inf")
    return err / nrm


def two_stage_cur(W, cfg: TwoStageConfig) -> tuple[CurFactors, Report]:
    """CUR of ``W`` from a skeleton of one random ``k x l`` submatrix.

    Random draws, in order: ``k`` rows, ``l`` columns, ``s`` probe columns.
    """
    W = as_matrix(W, "W")
    m, n = W.shape
    cfg.check(m, n)
    t0 = time.perf_counter()
    rng = make_rng(cfg.seed)
    with counting() as total:
        I0 = sample_indices(m, cfg.k, rng)
        J0 = sample_indices(n, cfg.l, rng)
        with counting() as stage1:
            sel = select_rc(W[np.ix_(I0, J0)], cfg.r)
        rows, cols = I0[sel.rows], J0[sel.cols]
        f = build(W, rows, cols, rows.size, cfg.tol)
        probe = sample_columns(n, min(cfg.s, n), rng)
        err, nrm = sampled_residual(W, f, probe)
    rep = Report(
        algorithm="twostage",
        m=m,
        n=n,
        k=cfg.k,
        l=cfg.l,
        r=cfg.r,
        b=0,
        seed=cfg.seed,
        rel_err_sampled=_rel(err, nrm),
        rel_err_exact=None,
        flops=total.count,
        flops_stage1=stage1.count,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        rank_deficient=sel.rank_deficient,
    )
    return f, rep


def adaptive_cur(
    W,
    r: int,
    target_rel_err: float,
    seed: int = 0,
    max_level: int = 4,
    s: int = 16,
    tol: float = 1e-10,
) -> tuple[CurFactors, Report]:
    """Two-stage CUR with oversampling ``k = l = 4 r 2**level``.

    Stops at the first level whose sampled relative error is within
    ``target_rel_err``; otherwise returns the best attempt with
    ``converged=False``. Sample sizes are capped at ``min(m, n)`` and the
    search ends once the cap is reached. ``flops`` covers all attempts.
    """
    W = as_matrix(W, "W")
    m, n = W.shape
    if target_rel_err <= 0:
        raise ValueError("target_rel_err must be positive")
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank r={r} out of range [1, {min(m, n)}]")
    t0 = time.perf_counter()
    cap = min(m, n)
    best: tuple[CurFactors, Report] | None = None
    flops = 0
    for level in range(max_level + 1):
        size = min(4 * r * 2**level, cap)
        f, rep = two_stage_cur(W, TwoStageConfig(size, size, r, seed, tol, s))
        flops += rep.flops
        rep.adaptive_level = level
        ok = rep.rel_err_sampled <= target_rel_err
        if best is None or rep.rel_err_sampled < best[1].rel_err_sampled:
            best = (f, rep)
        if ok or size == cap:
            break
    f, rep = best
    rep.algorithm = "adaptive"
    rep.converged = rep.rel_err_sampled <= target_rel_err
    rep.flops = flops
    rep.wall_ms = (time.perf_counter() - t0) * 1e3
    return f, rep


def cross_approx(
    W,
    l: int,
    delta: float = 0.01,
    max_sweeps: int = 10,
    seed: int = 0,
    tol: float = 1e-10,
    s: int = 16,
    trace: list | None = None,
) -> tuple[CurFactors, Report]:
    """Alternating-maxvol cross approximation with ``k = l``.

    Starts from ``l`` random columns and ``I = maxvol(W[:, J])``; each sweep
    runs ``J = maxvol(W[I, :].T)`` then ``I = maxvol(W[:, J])``, both
    warm-started from the current sets, so ``|det W[I, J]|`` never
    decreases. Stops when a sweep leaves both sets unchanged. If the
    starting columns are rank deficient a fresh draw is tried once, after
    which ``l`` drops to the detected rank.

    When ``trace`` is a list, the intersection volume after initialization
    and after each sweep is appended to it.
    """
    W = as_matrix(W, "W")
    m, n = W.shape
    if not 1 <= l <= min(m, n):
        raise ValueError(f"l={l} out of range [1, {min(m, n)}]")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    t0 = time.perf_counter()
    rng = make_rng(seed)
    retries = 0
    rank_deficient = False
    degenerate = False
    converged = False
    with counting() as total:
        J = sample_indices(n, l, rng)
        while True:
            try:
                I = maxvol(W[:, J], delta).rows
                break
            except RankDeficientError:
                if retries == 0:
                    retries = 1
                    J = sample_indices(n, l, rng)
                    continue
                rank_deficient = True
                _, R, perm = qr_cp(W[:, J])
                rank = numerical_rank(R)
                if rank == 0:
                    I, J = np.array([0]), J[:1]
                    degenerate = True
                    break
                J = J[np.sort(perm[:rank])]
                l = rank
        if trace is not None:
            trace.append(volume(W[np.ix_(I, J)]))
        sweeps = 0
        if not degenerate:
            for sweeps in range(1, max_sweeps + 1):
                J_new = maxvol(W[I, :].T, delta, start=J).rows
                I_new = maxvol(W[:, J_new], delta, start=I).rows
                same = set(J_new) == set(J) and set(I_new) == set(I)
                I, J = I_new, J_new
                if trace is not None:
                    trace.append(volume(W[np.ix_(I, J)]))
                if same:
                    converged = True
                    break
        f = build(W, I, J, len(I), tol)
        probe = sample_columns(n, min(s, n), rng)
        err, nrm = sampled_residual(W, f, probe)
    rep = Report(
        algorithm="cross",
        m=m,
        n=n,
        k=len(I),
        l=len(J),
        r=len(I),
        b=0,
        seed=seed,
        rel_err_sampled=_rel(err, nrm),
        rel_err_exact=None,
        flops=total.count,
        flops_stage1=0,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        rank_deficient=rank_deficient,
        sweeps=sweeps,
        retries=retries,
        converged=converged,
    )
    return f, rep
