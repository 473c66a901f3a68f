"""Regenerate the small MatrixMarket corpus in data/.

The files stand in for regularization test problems: all are dense,
numerically low-rank discretized integral operators or their relatives.
"""

from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.io import mmwrite

from fastcur.inputs import hilbert, write_matrix_market

DATA = Path(__file__).resolve().parent.parent / "data"


def gravity(n, d=0.25):
    # 1-D gravity surveying kernel on [0, 1], midpoint rule
    t = (np.arange(1, n + 1) - 0.5) / n
    return (1.0 / n) * d * (d**2 + (t[:, None] - t[None, :]) ** 2) ** -1.5


def shaw(n):
    # Shaw's 1-D image restoration kernel on [-pi/2, pi/2]
    h = np.pi / n
    s = -np.pi / 2 + (np.arange(n) + 0.5) * h
    c = np.cos(s)[:, None] + np.cos(s)[None, :]
    u = np.pi * (np.sin(s)[:, None] + np.sin(s)[None, :])
    with np.errstate(invalid="ignore", divide="ignore"):
        K = c**2 * np.where(u == 0, 1.0, (np.sin(u) / u) ** 2)
    return h * K


def main():
    DATA.mkdir(exist_ok=True)
    write_matrix_market(DATA / "hilbert100.mtx", hilbert(100), comment="Hilbert matrix, entries 1/(i+j+1)")
    write_matrix_market(DATA / "gravity100.mtx", gravity(100), comment="gravity surveying kernel, d=0.25")
    write_matrix_market(DATA / "shaw100.mtx", shaw(100), comment="Shaw restoration kernel")
    n = 60
    lap = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])
    mmwrite(DATA / "laplace60.mtx", sp.coo_matrix(lap), comment="1-D Dirichlet Laplacian", symmetry="symmetric")


if __name__ == "__main__":
    main()
