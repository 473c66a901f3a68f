"""Measured flops of two-stage CUR as the matrix grows with a fixed sample size."""

from _common import parser, save
from fastcur.inputs import GeneratorSpec, generate
from fastcur.twostage import TwoStageConfig, two_stage_cur


def main():
    p = parser(__doc__)
    p.add_argument("--sizes", default="250,500,1000,2000,4000")
    args = p.parse_args()
    reports = []
    for n in (int(t) for t in args.sizes.split(",")):
        W = generate(GeneratorSpec("average", n, n, 8, 1e-8, seed=1))
        _, rep = two_stage_cur(W, TwoStageConfig(32, 32, 8, seed=1, s=16))
        rep.input = f"average:{n}x{n}:r8:noise1e-8"
        reports.append(rep)
        print(f"n={n:5d}: {rep.flops:9d} flops ({rep.flops / n**2:.3f} per entry), stage one {rep.flops_stage1}")
    save(args.out_dir, "flops_vs_n", reports, "flops_vs_n")


if __name__ == "__main__":
    main()
