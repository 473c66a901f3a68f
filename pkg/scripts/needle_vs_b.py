"""Needle-input success rate of preprocessed CUR against the number of bidiagonal factors.

Gaussian multipliers are reported with ``b = -1`` as the reference rate.
"""

import numpy as np

from _common import parser, save
from fastcur.inputs import GeneratorSpec, generate
from fastcur.preprocess import MultiplierSpec, preprocessed_cur
from fastcur.twostage import TwoStageConfig


def run(spec, b_label, trials, k, permute_tag):
    reports = []
    for seed in range(1, trials + 1):
        W = generate(GeneratorSpec("needle", 200, 200, 2, spike_mag=1e6, seed=seed))
        lr, rep = preprocessed_cur(W, TwoStageConfig(k, k, 2, seed=seed), spec, spec)
        rep.rel_err_exact = float(np.linalg.norm(W - lr.dense()) / np.linalg.norm(W))
        rep.converged = rep.rel_err_exact <= 1e-6
        rep.b = b_label
        rep.input = f"needle:200x200:r2:{permute_tag}"
        reports.append(rep)
    return reports


def main():
    p = parser(__doc__)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--permute", choices=["interleaved", "none"], default="interleaved")
    args = p.parse_args()
    reports = run(MultiplierSpec("gaussian"), -1, args.trials, args.k, "gaussian")
    for b in (0, 2, 4, 8, 16, 32):
        reports += run(MultiplierSpec("bidiag", b, args.permute), b, args.trials, args.k, args.permute)
    for b in sorted({r.b for r in reports}):
        sub = [r for r in reports if r.b == b]
        print(f"b={b:3d}: {sum(r.converged for r in sub)}/{len(sub)} successes")
    save(args.out_dir, f"needle_vs_b_{args.permute}", reports, "success_vs_b")


if __name__ == "__main__":
    main()
