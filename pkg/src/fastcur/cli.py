"""Command-line harness: ``fastcur approx``, ``fastcur genp``, ``fastcur plot``.

Exit codes: 0 success, 2 usage or configuration error, 3 internal numerical
error. Options may also come from a JSON file given with ``--config``; keys
are the option names with dashes replaced by underscores, and explicit flags
win. ``FASTCUR_OUT_DIR`` supplies the output directory when ``--out-dir`` is
not given.
"""

from __future__ import annotations

import argparse
import contextvars
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import plot as plotting
from .elimination import PivotBreakdown, block_ge, genp, lu_solve, solve_preprocessed
from .inputs import GeneratorSpec, generate, read_matrix_market
from .kernels import counting, make_rng
from .preprocess import MultiplierSpec, derive_seed, preprocessed_cur
from .report import GenpReport, to_csv, to_json
from .twostage import TwoStageConfig, adaptive_cur, cross_approx, two_stage_cur

OUT_DIR_ENV = "FASTCUR_OUT_DIR"


class UsageError(Exception):
    pass


APPROX_DEFAULTS = {
    "gen": None,
    "input": None,
    "alg": "twostage",
    "k": None,
    "l": None,
    "r": 1,
    "s": 16,
    "tol": 1e-10,
    "delta": 0.01,
    "max_sweeps": 10,
    "max_level": 4,
    "target": None,
    "left": "identity",
    "right": "identity",
    "seeds": "0",
    "exact": False,
    "out": "csv",
    "out_dir": None,
    "name": "reports",
    "jobs": 1,
    "mask_wall": False,
}

GENP_DEFAULTS = {
    "family": "singular3:100",
    "input": None,
    "method": "compare",
    "block": 1,
    "left": "gaussian",
    "right": "gaussian",
    "pivot_tol": 1e-12,
    "seeds": "0",
    "out": "csv",
    "out_dir": None,
    "name": "genp",
    "jobs": 1,
    "mask_wall": False,
}


def parse_seeds(text) -> list[int]:
    """``"1..10"`` (inclusive), ``"1,4,9"`` or a single integer."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(t) for t in text]
    seeds: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            a, b = int(a), int(b)
            if b < a:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(a, b + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def _merge(args: argparse.Namespace, defaults: dict) -> dict:
    conf: dict = {}
    if args.config:
        try:
            conf = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(conf, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(conf) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    opts = dict(defaults)
    opts.update(conf)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    if opts["out_dir"] is None and os.environ.get(OUT_DIR_ENV):
        opts["out_dir"] = os.environ[OUT_DIR_ENV]
    return opts


def _run_batch(fn, seeds, jobs: int):
    """Run ``fn(seed)`` per seed, each in its own context; results in seed order."""
    if jobs <= 1:
        return [contextvars.copy_context().run(fn, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(contextvars.copy_context().run, fn, s) for s in seeds]
        return [f.result() for f in futures]


def _emit(reports, opts) -> None:
    mask = bool(opts["mask_wall"])
    csv_text = to_csv(reports, mask_wall=mask)
    json_text = to_json(reports, mask_wall=mask)
    if opts["out_dir"]:
        out = Path(opts["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{opts['name']}.csv").write_text(csv_text, newline="")
        (out / f"{opts['name']}.json").write_text(json_text)
        return
    text = csv_text if opts["out"] == "csv" else json_text
    sys.stdout.write(text)


def _load_input(opts) -> tuple[object, str]:
    if (opts["gen"] is None) == (opts["input"] is None):
        raise UsageError("give exactly one of --gen or --in")
    if opts["input"] is not None:
        path = Path(opts["input"])
        try:
            return read_matrix_market(path), path.name
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        spec = GeneratorSpec.parse(opts["gen"])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad generator spec: {exc}") from None
    return generate(spec), opts["gen"]


def cmd_approx(opts: dict) -> list:
    W, label = _load_input(opts)
    m, n = W.shape
    alg = opts["alg"]
    if alg not in ("twostage", "adaptive", "cross", "preprocessed"):
        raise UsageError(f"unknown algorithm {alg!r}")
    try:
        seeds = parse_seeds(opts["seeds"])
        r = int(opts["r"])
        k = int(opts["k"]) if opts["k"] is not None else min(4 * r, m)
        l = int(opts["l"]) if opts["l"] is not None else min(4 * r, n)
        left = MultiplierSpec.parse(opts["left"])
        right = MultiplierSpec.parse(opts["right"])
        target = opts["target"]
        if alg == "adaptive" and target is None:
            raise ValueError("adaptive needs --target")
        if alg in ("twostage", "preprocessed"):
            TwoStageConfig(k, l, r, 0, float(opts["tol"]), int(opts["s"])).check(m, n)
        if alg == "cross" and not 1 <= l <= min(m, n):
            raise ValueError(f"l={l} out of range [1, {min(m, n)}]")
        if alg == "adaptive" and not 1 <= r <= min(m, n):
            raise ValueError(f"r={r} out of range")
        if int(opts["jobs"]) < 1:
            raise ValueError("jobs must be >= 1")
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None

    def one(seed: int):
        cfg = TwoStageConfig(k, l, r, seed, float(opts["tol"]), int(opts["s"]))
        if alg == "twostage":
            f, rep = two_stage_cur(W, cfg)
        elif alg == "adaptive":
            f, rep = adaptive_cur(W, r, float(target), seed, int(opts["max_level"]), cfg.s, cfg.tol)
        elif alg == "cross":
            f, rep = cross_approx(W, l, float(opts["delta"]), int(opts["max_sweeps"]), seed, cfg.tol, cfg.s)
        else:
            f, rep = preprocessed_cur(W, cfg, left, right)
        if opts["exact"]:
            # validation only: O(mn), after the run's flops were recorded
            approx = f.dense() if alg == "preprocessed" else f.dense(W)
            nrm = float(np.linalg.norm(W))
            err = float(np.linalg.norm(W - approx))
            rep.rel_err_exact = err / nrm if nrm > 0 else (0.0 if err == 0 else float("inf"))
        if target is not None and alg != "adaptive":
            err = rep.rel_err_exact if rep.rel_err_exact is not None else rep.rel_err_sampled
            rep.converged = err <= float(target)
        rep.input = label
        return rep

    return _run_batch(one, seeds, int(opts["jobs"]))


def genp_instance(family: str, seed: int) -> np.ndarray:
    """``singular3:N``: Gaussian N x N with a rank-2 leading 3 x 3 block;
    ``swap2``: the 2 x 2 exchange matrix; ``gaussian:N``: plain Gaussian."""
    name, _, size = family.partition(":")
    if name == "swap2":
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    n = int(size) if size else 100
    A = make_rng(seed).standard_normal((n, n))
    if name == "singular3":
        if n < 3:
            raise ValueError("singular3 needs N >= 3")
        A[2, :3] = A[0, :3] + A[1, :3]
    elif name != "gaussian":
        raise ValueError(f"unknown family {family!r}")
    return A


def _relres(A, x, rhs) -> float:
    den = np.linalg.norm(A, 2) * np.linalg.norm(x)
    num = np.linalg.norm(A @ x - rhs)
    return float(num / den) if den > 0 else float(num)


def cmd_genp(opts: dict) -> list:
    method = opts["method"]
    if method not in ("genp", "block", "preprocessed", "compare"):
        raise UsageError(f"unknown method {method!r}")
    try:
        seeds = parse_seeds(opts["seeds"])
        left = MultiplierSpec.parse(opts["left"])
        right = MultiplierSpec.parse(opts["right"])
        block = int(opts["block"])
        if opts["input"] is not None:
            fixed = read_matrix_market(opts["input"])
            label = Path(opts["input"]).name
            if fixed.shape[0] != fixed.shape[1]:
                raise ValueError("genp needs a square matrix")
        else:
            fixed = None
            label = opts["family"]
            genp_instance(label, 0)
        n = fixed.shape[0] if fixed is not None else genp_instance(label, 0).shape[0]
        if not 1 <= block <= n:
            raise ValueError(f"block size {block} out of range [1, {n}]")
        if int(opts["jobs"]) < 1:
            raise ValueError("jobs must be >= 1")
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    tol = float(opts["pivot_tol"])
    bfac = max(left.factors, right.factors)

    def raw(A, rhs, seed, alg, blk):
        t0 = time.perf_counter()
        with counting() as c:
            try:
                lu = block_ge(A, blk, tol) if alg == "block" else genp(A, tol)
                x = lu_solve(lu, rhs)
                growth, res, failed, step = lu.growth, _relres(A, x, rhs), False, None
            except PivotBreakdown as exc:
                growth, res, failed, step = None, None, True, exc.step
        return GenpReport(alg, A.shape[0], blk, 0, seed, growth, res, failed, step, 0, c.count,
                          (time.perf_counter() - t0) * 1e3, label)

    def pre(A, rhs, seed):
        t0 = time.perf_counter()
        with counting() as c:
            try:
                out = solve_preprocessed(A, rhs, left, right, tol, seed)
                growth, res, failed, step, retries = out.lu.growth, _relres(A, out.x, rhs), False, None, out.retries
            except PivotBreakdown as exc:
                growth, res, failed, step, retries = None, None, True, exc.step, 1
        return GenpReport("preprocessed", A.shape[0], 1, bfac, seed, growth, res, failed, step, retries,
                          c.count, (time.perf_counter() - t0) * 1e3, label)

    def one(seed: int):
        A = fixed if fixed is not None else genp_instance(label, seed)
        rhs = make_rng(derive_seed(seed, 3)).standard_normal(A.shape[0])
        if method == "genp":
            return [raw(A, rhs, seed, "genp", 1)]
        if method == "block":
            return [raw(A, rhs, seed, "block", block)]
        if method == "preprocessed":
            return [pre(A, rhs, seed)]
        return [raw(A, rhs, seed, "genp", 1), pre(A, rhs, seed)]

    reports = [rep for batch in _run_batch(one, seeds, int(opts["jobs"])) for rep in batch]
    for alg in dict.fromkeys(r.algorithm for r in reports):
        sub = [r for r in reports if r.algorithm == alg]
        fails = sum(r.failed for r in sub)
        print(f"{alg}: {len(sub) - fails}/{len(sub)} completed, {fails} pivot breakdowns", file=sys.stderr)
    return reports


def cmd_plot(args) -> None:
    try:
        reports = json.loads(Path(args.reports).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read reports {args.reports}: {exc}") from None
    if not isinstance(reports, list) or not reports:
        raise UsageError("empty report set")
    try:
        svg = plotting.render(args.kind, reports)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot plot: {exc}") from None
    Path(args.out).write_text(svg)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fastcur", description="Sublinear CUR approximation experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with option values")
        sp.add_argument("--seeds", help="seed list: 1..10 or 1,2,3")
        sp.add_argument("--out", choices=["csv", "json"], help="stdout format when --out-dir is unset")
        sp.add_argument("--out-dir", dest="out_dir", help="write <name>.csv and <name>.json here")
        sp.add_argument("--name", help="output file stem")
        sp.add_argument("--jobs", type=int, help="seeds run concurrently")
        sp.add_argument("--mask-wall", dest="mask_wall", action="store_const", const=True,
                        help="blank wall_ms for byte-stable output")
        sp.add_argument("--left", help="left multiplier: identity | gaussian | bidiag:B[:none|interleaved]")
        sp.add_argument("--right", help="right multiplier, same syntax")

    a = sub.add_parser("approx", help="CUR / low-rank approximation runs")
    common(a)
    a.add_argument("--gen", help="generator, e.g. average:200x200:r5:noise1e-10")
    a.add_argument("--in", dest="input", help="MatrixMarket file")
    a.add_argument("--alg", choices=["twostage", "adaptive", "cross", "preprocessed"])
    a.add_argument("--k", type=int)
    a.add_argument("--l", type=int)
    a.add_argument("--r", type=int)
    a.add_argument("--s", type=int, help="probe columns for the sampled error")
    a.add_argument("--tol", type=float)
    a.add_argument("--delta", type=float)
    a.add_argument("--max-sweeps", dest="max_sweeps", type=int)
    a.add_argument("--max-level", dest="max_level", type=int)
    a.add_argument("--target", type=float, help="relative error counted as success")
    a.add_argument("--exact", action="store_const", const=True, help="also compute the exact error (O(mn))")

    g = sub.add_parser("genp", help="pivot-free elimination experiments")
    common(g)
    g.add_argument("--family", help="singular3:N | gaussian:N | swap2")
    g.add_argument("--in", dest="input", help="MatrixMarket file (square)")
    g.add_argument("--method", choices=["genp", "block", "preprocessed", "compare"])
    g.add_argument("--block", type=int)
    g.add_argument("--pivot-tol", dest="pivot_tol", type=float)

    pl = sub.add_parser("plot", help="SVG plot from a reports JSON file")
    pl.add_argument("reports")
    pl.add_argument("--kind", required=True, choices=sorted(plotting.KINDS))
    pl.add_argument("--out", required=True, help="output SVG path")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plot":
            cmd_plot(args)
            return 0
        if args.command == "approx":
            opts = _merge(args, APPROX_DEFAULTS)
            reports = cmd_approx(opts)
        else:
            opts = _merge(args, GENP_DEFAULTS)
            reports = cmd_genp(opts)
        _emit(reports, opts)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fastcur: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failures inside a run
        print(f"fastcur: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
