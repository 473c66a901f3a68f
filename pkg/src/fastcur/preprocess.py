"""Random multipliers and the preprocessed approximation pipeline.

A ``bidiag_product`` multiplier of ``b`` factors is

    M = P_b B_b ... P_2 B_2 P_1 B_1

where each ``B_t`` is unit bidiagonal with i.i.d. standard normal
off-diagonal entries (``B_1`` lower, then alternating) and each ``P_t`` is a
uniform random permutation when ``permute == "interleaved"`` and the identity
otherwise. A permutation acts as ``(P x)[i] = x[perm[i]]``. Unit diagonals
make ``det M = +-1`` and every solve an exact substitution. Rows and columns
of ``M`` are sparse (at most ``b + 1`` nonzeros without permutations, at most
``min(2**b, n)`` with them), which keeps sampled entries of ``F W H`` cheap.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .kernels import add_flops, as_matrix, counting, make_rng, matmul, pinv_trunc
from .cur import sample_columns
from .report import Report
from .selection import select_rc
from .twostage import TwoStageConfig, _rel, sample_indices

__all__ = [
    "LowRankFactors",
    "Multiplier",
    "MultiplierSpec",
    "SingularMultiplierError",
    "SparseVector",
    "apply_mult",
    "bidiagonal_product",
    "derive_seed",
    "gaussian_multiplier",
    "identity_multiplier",
    "preprocessed_cur",
    "solve_mult",
    "sparse_col",
    "sparse_row",
]

COND_LIMIT = 1e14


class SingularMultiplierError(ArithmeticError):
    pass


def derive_seed(seed: int, *tags: int) -> int:
    """Deterministic 64-bit child seed of ``seed`` for the given integer tags."""
    words = np.random.SeedSequence([int(seed) & (2**64 - 1), *tags]).generate_state(2)
    return int(words[0]) | (int(words[1]) << 32)


@dataclass(frozen=True, eq=False)
class Multiplier:
    kind: str
    n: int
    b: int = 0
    seed: int = 0
    permute: str = "none"
    dense: np.ndarray | None = field(default=None, repr=False)
    offdiag: tuple[np.ndarray, ...] = field(default=(), repr=False)
    perms: tuple[np.ndarray, ...] = field(default=(), repr=False)

    def orientation(self, t: int) -> str:
        return "lower" if t % 2 == 0 else "upper"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "b": self.b, "seed": self.seed, "permute": self.permute}

    @classmethod
    def from_dict(cls, d: dict) -> Multiplier:
        if d["kind"] == "gaussian":
            return gaussian_multiplier(d["n"], d["seed"])
        return bidiagonal_product(d["n"], d["b"], d["seed"], d.get("permute", "none"))

    def todense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense.copy()
        return _left(self, np.eye(self.n))


def gaussian_multiplier(n: int, seed: int) -> Multiplier:
    """Dense ``n x n`` multiplier with i.i.d. standard normal entries (row-major draws)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    G = make_rng(seed).standard_normal((n, n))
    return Multiplier("gaussian", n, 0, seed, "none", dense=G)


def bidiagonal_product(n: int, b: int, seed: int, permute: str = "none") -> Multiplier:
    """Product of ``b`` alternating unit-bidiagonal factors.

    Per factor the generator draws ``n - 1`` off-diagonal normals and then,
    for ``permute="interleaved"``, one permutation. ``b = 0`` is the identity.
    """
    if n < 1 or b < 0:
        raise ValueError("need n >= 1 and b >= 0")
    if permute not in ("none", "interleaved"):
        raise ValueError(f"unknown permute mode {permute!r}")
    rng = make_rng(seed)
    offdiag, perms = [], []
    for _ in range(b):
        offdiag.append(rng.standard_normal(n - 1))
        if permute == "interleaved":
            perms.append(rng.permutation(n))
    return Multiplier("bidiag_product", n, b, seed, permute, offdiag=tuple(offdiag), perms=tuple(perms))


def identity_multiplier(n: int) -> Multiplier:
    return bidiagonal_product(n, 0, 0)


# Elementary steps on the leading axis of X. ``lower`` means the factor has
# its off-diagonal below the diagonal.


def _mul(X, d, lower):
    Y = X.copy()
    if lower:
        Y[1:] += d.reshape(-1, *[1] * (X.ndim - 1)) * X[:-1]
    else:
        Y[:-1] += d.reshape(-1, *[1] * (X.ndim - 1)) * X[1:]
    return Y


def _solve(X, d, lower):
    Y = X.copy()
    n = Y.shape[0]
    if lower:
        for i in range(1, n):
            Y[i] -= d[i - 1] * Y[i - 1]
    else:
        for i in range(n - 2, -1, -1):
            Y[i] -= d[i] * Y[i + 1]
    return Y


def _cols(X) -> int:
    return 1 if X.ndim == 1 else X.shape[1]


def _left(M: Multiplier, X, transpose=False, inverse=False):
    """``op(M) @ X`` for op in {M, M^T, M^-1, M^-T} on a bidiagonal product."""
    X = np.array(X, dtype=np.float64)
    b = M.b
    perm = bool(M.perms)
    reverse = transpose != inverse  # M^T and M^-1 run the factors backwards
    order = range(b - 1, -1, -1) if reverse else range(b)
    for t in order:
        lower = (M.orientation(t) == "lower") != transpose
        if reverse and perm:
            # P^T x == P^-1 x: y[perm[i]] = x[i]
            Y = np.empty_like(X)
            Y[M.perms[t]] = X
            X = Y
        X = _solve(X, M.offdiag[t], lower) if inverse else _mul(X, M.offdiag[t], lower)
        if not reverse and perm:
            # forward order applies P_t (for M) or P_t^-T == P_t (for M^-T)
            X = X[M.perms[t]]
        add_flops((M.n - 1) * _cols(X))
    return X


def apply_mult(M: Multiplier, X, side: str = "left") -> np.ndarray:
    """``M @ X`` (left) or ``X @ M`` (right)."""
    X = np.asarray(X, dtype=np.float64)
    _check_side(M, X, side)
    if M.kind == "gaussian":
        return matmul(M.dense, X) if side == "left" else matmul(X, M.dense)
    if side == "left":
        return _left(M, X)
    return _left(M, X.T, transpose=True).T


def solve_mult(M: Multiplier, X, side: str = "left") -> np.ndarray:
    """``M^-1 @ X`` (left) or ``X @ M^-1`` (right)."""
    X = np.asarray(X, dtype=np.float64)
    _check_side(M, X, side)
    if M.kind == "gaussian":
        if np.linalg.cond(M.dense) > COND_LIMIT:
            raise SingularMultiplierError(f"gaussian multiplier (seed {M.seed}) is numerically singular")
        add_flops(M.n**3 // 3 + M.n**2 * _cols(X))
        if side == "left":
            return np.linalg.solve(M.dense, X)
        return np.linalg.solve(M.dense.T, X.T).T
    if side == "left":
        return _left(M, X, inverse=True)
    return _left(M, X.T, transpose=True, inverse=True).T


def _check_side(M, X, side):
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    dim = X.shape[0] if side == "left" else X.shape[-1]
    if side == "right" and X.ndim != 2:
        raise ValueError("right application needs a matrix")
    if dim != M.n:
        raise ValueError(f"dimension mismatch: multiplier is {M.n}x{M.n}, operand {X.shape} ({side})")


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray
    values: np.ndarray
    n: int

    def todense(self) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.indices] = self.values
        return out


def _sparse(M: Multiplier, j: int, transpose: bool) -> SparseVector:
    if M.kind != "bidiag_product":
        raise TypeError("sparse extraction needs a bidiag_product multiplier; gaussian columns are dense")
    if not 0 <= j < M.n:
        raise IndexError(f"index {j} out of range [0, {M.n})")
    n = M.n
    x = np.zeros(n)
    x[j] = 1.0
    support = np.array([j], dtype=np.intp)
    order = range(M.b - 1, -1, -1) if transpose else range(M.b)
    flops = 0
    for t in order:
        if transpose and M.perms:
            p = M.perms[t]
            y = np.empty_like(x)
            y[p] = x
            x, support = y, p[support]
        d = M.offdiag[t]
        lower = (M.orientation(t) == "lower") != transpose
        # distinct sources map to distinct targets, so fancy += is safe
        src = support[support + 1 < n] if lower else support[support > 0]
        dst = src + 1 if lower else src - 1
        x[dst] += d[src if lower else dst] * x[src]
        flops += src.size
        support = np.union1d(support, dst)
        if not transpose and M.perms:
            p = M.perms[t]
            inv = np.argsort(p)
            x, support = x[p], inv[support]
    add_flops(flops)
    support = np.sort(support)
    return SparseVector(support, x[support], n)


def sparse_col(M: Multiplier, j: int) -> SparseVector:
    """Column ``j`` of a bidiagonal product.

    Without permutations the support is a window of at most ``b + 1``
    entries and the cost is O(b^2) flops. Interleaved permutations scatter
    the support, so each factor can double it (bound ``min(2**b, n)``).
    """
    return _sparse(M, j, transpose=False)


def sparse_row(M: Multiplier, i: int) -> SparseVector:
    """Row ``i`` of a bidiagonal product (column ``i`` of its transpose)."""
    return _sparse(M, i, transpose=True)


@dataclass(frozen=True)
class MultiplierSpec:
    """How to generate a multiplier; the seed comes from the run seed."""

    kind: str = "identity"
    b: int = 16
    permute: str = "interleaved"

    def __post_init__(self):
        if self.kind not in ("identity", "gaussian", "bidiag"):
            raise ValueError(f"unknown multiplier kind {self.kind!r}")

    def make(self, n: int, seed: int) -> Multiplier:
        if self.kind == "identity":
            return identity_multiplier(n)
        if self.kind == "gaussian":
            return gaussian_multiplier(n, seed)
        return bidiagonal_product(n, self.b, seed, self.permute)

    @property
    def factors(self) -> int:
        return self.b if self.kind == "bidiag" else 0

    @classmethod
    def parse(cls, text: str) -> MultiplierSpec:
        """``identity``, ``gaussian``, ``bidiag:16`` or ``bidiag:16:none``."""
        parts = text.split(":")
        if parts[0] != "bidiag":
            if len(parts) != 1:
                raise ValueError(f"bad multiplier spec {text!r}")
            return cls(parts[0])
        b = int(parts[1]) if len(parts) > 1 else 16
        permute = parts[2] if len(parts) > 2 else "interleaved"
        return cls("bidiag", b, permute)


@dataclass(frozen=True)
class LowRankFactors:
    A: np.ndarray
    B: np.ndarray

    def dense(self) -> np.ndarray:
        return matmul(self.A, self.B)

    def apply(self, x) -> np.ndarray:
        return matmul(self.A, matmul(self.B, x))


def _rows_of(M: Multiplier, idx) -> tuple[sp.csr_matrix, np.ndarray] | np.ndarray:
    """Rows ``idx`` of ``M`` as a sparse matrix over their joint support."""
    vecs = [sparse_row(M, int(i)) for i in idx]
    support = np.unique(np.concatenate([v.indices for v in vecs]))
    pos = {int(s): a for a, s in enumerate(support)}
    data, ri, ci = [], [], []
    for a, v in enumerate(vecs):
        data.extend(v.values)
        ri.extend([a] * v.indices.size)
        ci.extend(pos[int(s)] for s in v.indices)
    mat = sp.csr_matrix((data, (ri, ci)), shape=(len(vecs), support.size))
    return mat, support


def _cols_of(M: Multiplier, idx):
    vecs = [sparse_col(M, int(j)) for j in idx]
    support = np.unique(np.concatenate([v.indices for v in vecs]))
    pos = {int(s): a for a, s in enumerate(support)}
    data, ri, ci = [], [], []
    for a, v in enumerate(vecs):
        data.extend(v.values)
        ri.extend(pos[int(s)] for s in v.indices)
        ci.extend([a] * v.indices.size)
    mat = sp.csc_matrix((data, (ri, ci)), shape=(support.size, len(vecs)))
    return mat, support


def _sp_left(S, X) -> np.ndarray:
    add_flops(S.nnz * _cols(X))
    return np.ascontiguousarray(S @ X)


def _sp_right(X, S) -> np.ndarray:
    add_flops(S.nnz * X.shape[0])
    return np.ascontiguousarray(X @ S)


def _left_rows(F: Multiplier, idx, W) -> np.ndarray:
    """``F[idx, :] @ W`` without forming ``F``."""
    if F.kind == "gaussian":
        return matmul(F.dense[idx], W)
    S, support = _rows_of(F, idx)
    return _sp_left(S, W[support])


def _right_cols(W, H: Multiplier, idx) -> np.ndarray:
    """``W @ H[:, idx]`` without forming ``H``."""
    if H.kind == "gaussian":
        return matmul(W, H.dense[:, idx])
    S, support = _cols_of(H, idx)
    return _sp_right(np.ascontiguousarray(W[:, support]), S)


def _block(F, H, W, I0, J0) -> np.ndarray:
    """Entries ``(F W H)[I0, J0]``; reads only the supports for sparse multipliers."""
    if F.kind == "gaussian" or H.kind == "gaussian":
        return _right_cols(_left_rows(F, I0, W), H, J0)
    Sf, rs = _rows_of(F, I0)
    Sh, cs = _cols_of(H, J0)
    G = np.ascontiguousarray(W[np.ix_(rs, cs)])
    return _sp_right(_sp_left(Sf, G), Sh)


def _resolve(mult, n: int, seed: int) -> Multiplier:
    if isinstance(mult, Multiplier):
        if mult.n != n:
            raise ValueError(f"multiplier dimension {mult.n} does not match {n}")
        return mult
    return mult.make(n, seed)


def preprocessed_cur(
    W, cfg: TwoStageConfig, left=MultiplierSpec(), right=MultiplierSpec()
) -> tuple[LowRankFactors, Report]:
    """Two-stage CUR of ``W' = F W H`` mapped back to factors of ``W``.

    ``left``/``right`` are :class:`MultiplierSpec` configs (seeded from
    ``derive_seed(cfg.seed, 1)`` and ``derive_seed(cfg.seed, 2)``) or ready
    :class:`Multiplier` objects. ``W'`` is never formed: only the sampled
    block ``W'[I0, J0]`` and the factors are computed. With a skeleton
    ``W' ~= C' U' R'`` the returned factors are

        A = F^-1 C' U' = W H[:, cols] U'      (m x r)
        B = R' H^-1    = F[rows, :] W         (r x n)

    which needs no solves with the multipliers. The random draws match
    :func:`two_stage_cur` for the same seed, so identity multipliers
    reproduce its approximation exactly.
    """
    W = as_matrix(W, "W")
    m, n = W.shape
    cfg.check(m, n)
    F = _resolve(left, m, derive_seed(cfg.seed, 1))
    H = _resolve(right, n, derive_seed(cfg.seed, 2))
    t0 = time.perf_counter()
    rng = make_rng(cfg.seed)
    with counting() as total:
        I0 = sample_indices(m, cfg.k, rng)
        J0 = sample_indices(n, cfg.l, rng)
        block = _block(F, H, W, I0, J0)
        with counting() as stage1:
            sel = select_rc(block, cfg.r)
        rows, cols = I0[sel.rows], J0[sel.cols]
        U = pinv_trunc(block[np.ix_(sel.rows, sel.cols)], sel.rows.size, cfg.tol)
        A = matmul(_right_cols(W, H, cols), U)
        B = _left_rows(F, rows, W)
        probe = sample_columns(n, min(cfg.s, n), rng)
        Ws = W[:, probe]
        resid = Ws - matmul(A, B[:, probe])
        add_flops(2 * Ws.size)
        err = float(np.sqrt(np.einsum("ij,ij->", resid, resid)))
        nrm = float(np.sqrt(np.einsum("ij,ij->", Ws, Ws)))
    b = max(F.b, H.b)
    rep = Report(
        algorithm="preprocessed",
        m=m,
        n=n,
        k=cfg.k,
        l=cfg.l,
        r=cfg.r,
        b=b,
        seed=cfg.seed,
        rel_err_sampled=_rel(err, nrm),
        rel_err_exact=None,
        flops=total.count,
        flops_stage1=stage1.count,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        rank_deficient=sel.rank_deficient,
    )
    return LowRankFactors(A, B), rep
