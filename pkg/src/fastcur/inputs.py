"""Test-matrix generators and MatrixMarket I/O."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import make_rng

__all__ = [
    "GeneratorSpec",
    "MatrixMarketError",
    "average_matrix",
    "generate",
    "hilbert",
    "needle_matrix",
    "read_matrix_market",
    "write_matrix_market",
]


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "average"
    m: int = 100
    n: int = 100
    r: int = 1
    noise: float = 0.0
    spike_pos: tuple[int, int] = (0, 0)
    spike_mag: float = 1e6
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("average", "needle"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.m < 1 or self.n < 1:
            raise ValueError("generator dimensions must be positive")
        if not 1 <= self.r <= min(self.m, self.n):
            raise ValueError(f"rank r={self.r} out of range [1, {min(self.m, self.n)}]")
        if not (np.isfinite(self.noise) and self.noise >= 0):
            raise ValueError("noise must be finite and non-negative")
        if not np.isfinite(self.spike_mag):
            raise ValueError("spike_mag must be finite")
        i, j = self.spike_pos
        if not (0 <= i < self.m and 0 <= j < self.n):
            raise ValueError("spike position outside the matrix")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> GeneratorSpec:
        """Parse ``average:200x200:r5:noise1e-10`` or ``needle:200x200:r2:spike1e6:at0,0``.

        A ``seedN`` token overrides the ``seed`` argument.
        """
        parts = text.strip().split(":")
        kind = parts[0]
        kw: dict = {"kind": kind, "seed": seed}
        for tok in parts[1:]:
            if m := re.fullmatch(r"(\d+)x(\d+)", tok):
                kw["m"], kw["n"] = int(m[1]), int(m[2])
            elif m := re.fullmatch(r"r(\d+)", tok):
                kw["r"] = int(m[1])
            elif tok.startswith("noise"):
                kw["noise"] = float(tok[5:])
            elif tok.startswith("spike"):
                kw["spike_mag"] = float(tok[5:])
            elif m := re.fullmatch(r"seed(\d+)", tok):
                kw["seed"] = int(m[1])
            elif m := re.fullmatch(r"at(\d+),(\d+)", tok):
                kw["spike_pos"] = (int(m[1]), int(m[2]))
            else:
                raise ValueError(f"bad generator token {tok!r} in {text!r}")
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "n": self.n,
            "r": self.r,
            "noise": self.noise,
            "spike_pos": list(self.spike_pos),
            "spike_mag": self.spike_mag,
            "seed": self.seed,
        }


def _gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    # column-major draw order
    return rng.standard_normal(rows * cols).reshape((rows, cols), order="F")


def average_matrix(spec: GeneratorSpec) -> np.ndarray:
    """``G1 @ G2 + noise * E`` with i.i.d. standard normal factors.

    Draws ``G1`` (m x r), ``G2`` (r x n) and, only when ``noise > 0``, ``E``
    (m x n), in that order, each filled column by column.
    """
    if spec.kind != "average":
        raise ValueError("average_matrix needs kind='average'")
    rng = make_rng(spec.seed)
    G1 = _gaussian(rng, spec.m, spec.r)
    G2 = _gaussian(rng, spec.r, spec.n)
    W = G1 @ G2
    if spec.noise > 0:
        W += spec.noise * _gaussian(rng, spec.m, spec.n)
    return W


def needle_matrix(spec: GeneratorSpec) -> np.ndarray:
    """A single large entry on top of a rank ``r - 1`` Gaussian background.

    A row/column sample that misses the spike's row or column cannot see the
    dominant singular direction.
    """
    if spec.kind != "needle":
        raise ValueError("needle_matrix needs kind='needle'")
    rng = make_rng(spec.seed)
    W = np.zeros((spec.m, spec.n))
    if spec.r > 1:
        G1 = _gaussian(rng, spec.m, spec.r - 1)
        G2 = _gaussian(rng, spec.r - 1, spec.n)
        W += G1 @ G2
    i, j = spec.spike_pos
    W[i, j] += spec.spike_mag
    return W


def generate(spec: GeneratorSpec) -> np.ndarray:
    return average_matrix(spec) if spec.kind == "average" else needle_matrix(spec)


def hilbert(n: int) -> np.ndarray:
    i = np.arange(n)
    return 1.0 / (i[:, None] + i[None, :] + 1.0)


class MatrixMarketError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def read_matrix_market(path) -> np.ndarray:
    """Read a real ``coordinate`` or ``array`` MatrixMarket file into a dense array.

    Symmetric files are mirrored across the diagonal; coordinate entries not
    listed are zero and repeated coordinates are summed.
    """
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError(path, 1, "empty file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "%%MatrixMarket" or head[1].lower() != "matrix":
        raise MatrixMarketError(path, 1, f"malformed header {lines[0]!r}")
    fmt, field_, symm = (h.lower() for h in head[2:])
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(path, 1, f"unsupported format {fmt!r}")
    if field_ != "real":
        raise MatrixMarketError(path, 1, f"unsupported field {field_!r}; only real is accepted")
    if symm not in ("general", "symmetric"):
        raise MatrixMarketError(path, 1, f"unsupported symmetry {symm!r}")

    body = [
        (no, ln.split())
        for no, ln in enumerate(lines[1:], start=2)
        if ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise MatrixMarketError(path, len(lines), "missing size line")
    size_no, size = body[0]
    try:
        dims = [int(t) for t in size]
    except ValueError:
        raise MatrixMarketError(path, size_no, f"bad size line {' '.join(size)!r}") from None
    entries = body[1:]
    symmetric = symm == "symmetric"

    if fmt == "coordinate":
        if len(dims) != 3:
            raise MatrixMarketError(path, size_no, "coordinate size line needs 'rows cols nnz'")
        m, n, nnz = dims
    else:
        if len(dims) != 2:
            raise MatrixMarketError(path, size_no, "array size line needs 'rows cols'")
        m, n = dims
    if m < 1 or n < 1:
        raise MatrixMarketError(path, size_no, "matrix dimensions must be positive")
    if symmetric and m != n:
        raise MatrixMarketError(path, size_no, "symmetric matrix must be square")
    W = np.zeros((m, n))

    if fmt == "coordinate":
        for no, toks in entries:
            if len(toks) != 3:
                raise MatrixMarketError(path, no, "coordinate entry needs 'row col value'")
            try:
                i, j, v = int(toks[0]) - 1, int(toks[1]) - 1, float(toks[2])
            except ValueError:
                raise MatrixMarketError(path, no, f"unparsable entry {' '.join(toks)!r}") from None
            if not (0 <= i < m and 0 <= j < n):
                raise MatrixMarketError(path, no, f"index ({i + 1}, {j + 1}) outside {m}x{n}")
            if not np.isfinite(v):
                raise MatrixMarketError(path, no, "non-finite value")
            W[i, j] += v
            if symmetric and i != j:
                W[j, i] += v
        if len(entries) != nnz:
            lineno = entries[-1][0] if entries else size_no
            raise MatrixMarketError(path, lineno, f"expected {nnz} entries, found {len(entries)}")
        return W

    # array format: column-major; symmetric stores the lower triangle only
    if symmetric:
        slots = [(i, j) for j in range(n) for i in range(j, m)]
    else:
        slots = [(i, j) for j in range(n) for i in range(m)]
    if len(entries) != len(slots):
        lineno = entries[-1][0] if entries else size_no
        raise MatrixMarketError(path, lineno, f"expected {len(slots)} values, found {len(entries)}")
    for (i, j), (no, toks) in zip(slots, entries):
        if len(toks) != 1:
            raise MatrixMarketError(path, no, "array entry needs a single value")
        try:
            v = float(toks[0])
        except ValueError:
            raise MatrixMarketError(path, no, f"unparsable value {toks[0]!r}") from None
        if not np.isfinite(v):
            raise MatrixMarketError(path, no, "non-finite value")
        W[i, j] = v
        if symmetric:
            W[j, i] = v
    return W


def write_matrix_market(path, W, fmt: str = "array", comment: str | None = None) -> None:
    """Write a general real matrix with 17 significant digits."""
    W = np.asarray(W, dtype=np.float64)
    m, n = W.shape
    out = [f"%%MatrixMarket matrix {fmt} real general"]
    if comment:
        out.extend(f"% {c}" for c in comment.splitlines())
    if fmt == "array":
        out.append(f"{m} {n}")
        out.extend(f"{v:.17g}" for v in W.ravel(order="F"))
    elif fmt == "coordinate":
        ii, jj = np.nonzero(W.T)
        out.append(f"{m} {n} {ii.size}")
        out.extend(f"{i + 1} {j + 1} {W[i, j]:.17g}" for j, i in zip(ii, jj))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_text("\n".join(out) + "\n")
