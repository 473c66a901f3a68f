"""Pivot-free elimination on matrices with a singular leading 3x3 block, with and without preprocessing."""

import contextlib
import io

from _common import parser, save
from fastcur.cli import GENP_DEFAULTS, cmd_genp

VARIANTS = [
    ("gaussian", "gaussian"),
    ("bidiag:4", "bidiag:4"),
    ("bidiag:8", "bidiag:8"),
    ("bidiag:16", "bidiag:16"),
    ("bidiag:16", "identity"),
    ("bidiag:16:none", "bidiag:16:none"),
]


def main():
    p = parser(__doc__)
    p.add_argument("--n", type=int, default=100)
    args = p.parse_args()
    reports = []
    for left, right in VARIANTS:
        opts = dict(GENP_DEFAULTS, family=f"singular3:{args.n}", seeds=f"1..{args.trials}", left=left,
                    right=right, method="preprocessed")
        with contextlib.redirect_stderr(io.StringIO()):
            batch = cmd_genp(opts)
        for rep in batch:
            rep.input = f"{opts['family']} F={left} H={right}"
        ok = sum(not r.failed and r.residual <= 1e-8 for r in batch)
        broke = sum(r.failed for r in batch)
        print(f"F={left:15s} H={right:15s}: {ok}/{len(batch)} residual <= 1e-8, {broke} breakdowns")
        reports += batch
    save(args.out_dir, "genp_rescue", reports)


if __name__ == "__main__":
    main()
