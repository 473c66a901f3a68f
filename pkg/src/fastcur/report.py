"""Per-run records and their CSV/JSON serialization.

Field order is fixed: it is the CSV column order and the JSON key order.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields

__all__ = ["GenpReport", "Report", "to_csv", "to_json"]


@dataclass
class Report:
    algorithm: str
    m: int
    n: int
    k: int
    l: int
    r: int
    b: int
    seed: int
    rel_err_sampled: float
    rel_err_exact: float | None
    flops: int
    flops_stage1: int
    wall_ms: float
    rank_deficient: bool = False
    adaptive_level: int = 0
    sweeps: int = 0
    retries: int = 0
    converged: bool = True
    input: str = ""


@dataclass
class GenpReport:
    algorithm: str
    n: int
    block: int
    b: int
    seed: int
    growth: float | None
    residual: float | None
    failed: bool
    failed_step: int | None
    retries: int
    flops: int
    wall_ms: float
    input: str = ""


def _columns(reports) -> list[str]:
    return [f.name for f in fields(reports[0])]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(reports, mask_wall: bool = False) -> str:
    """RFC-4180 CSV with a header row; ``mask_wall`` blanks ``wall_ms``."""
    if not reports:
        return ""
    cols = _columns(reports)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for rep in reports:
        d = asdict(rep)
        if mask_wall:
            d["wall_ms"] = None
        w.writerow([_cell(d[c]) for c in cols])
    return buf.getvalue()


def to_json(reports, mask_wall: bool = False) -> str:
    out = []
    for rep in reports:
        d = asdict(rep)
        if mask_wall:
            d["wall_ms"] = None
        out.append(d)
    return json.dumps(out, indent=1, ensure_ascii=False) + "\n"
