"""Shared output helpers for the experiment scripts."""

import argparse
import json
from pathlib import Path

from fastcur.plot import render
from fastcur.report import to_csv, to_json

RESULTS = Path(__file__).resolve().parent.parent / "results"


def parser(doc: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--out-dir", type=Path, default=RESULTS)
    p.add_argument("--trials", type=int, default=100, help="seeds per setting")
    return p


def save(out_dir: Path, name: str, reports, kind: str | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{name}.csv").write_text(to_csv(reports, mask_wall=True), newline="")
    text = to_json(reports, mask_wall=True)
    (out_dir / f"{name}.json").write_text(text)
    if kind:
        (out_dir / f"{name}.svg").write_text(render(kind, json.loads(text)))
    print(f"wrote {out_dir / name}.{{csv,json{',svg' if kind else ''}}}")
