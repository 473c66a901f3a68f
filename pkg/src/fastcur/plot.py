"""Deterministic SVG scatter plots of report fields."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 480
MARGIN = 70

KINDS = {
    "error_vs_k": ("k", "rel_err", "sample size k", "relative error"),
    "flops_vs_n": ("n", "flops", "columns n", "flops"),
    "success_vs_b": ("b", "success", "bidiagonal factors b", "success rate"),
}


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _axis(values, force_linear=False):
    lo, hi = min(values), max(values)
    log = not force_linear and lo > 0 and hi / lo >= 100.0
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return log, lo, hi


def svg_scatter(points, xlabel: str, ylabel: str, title: str = "") -> str:
    """Render ``(x, y)`` points. An axis is log-scaled when it spans two decades."""
    if not points:
        raise ValueError("nothing to plot")
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    xlog, x0, x1 = _axis(xs)
    ylog, y0, y1 = _axis(ys)

    def px(x):
        v = math.log10(x) if xlog else x
        return MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

    def py(y):
        v = math.log10(y) if ylog else y
        return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        xt = 10**xv if xlog else xv
        yt = 10**yv if ylog else yv
        gx = MARGIN + frac * (WIDTH - 2 * MARGIN)
        gy = HEIGHT - MARGIN - frac * (HEIGHT - 2 * MARGIN)
        out.append(f'<text x="{gx:.2f}" y="{HEIGHT - MARGIN + 18}" font-size="11" text-anchor="middle">{_fmt(xt)}</text>')
        out.append(f'<text x="{MARGIN - 6}" y="{gy + 4:.2f}" font-size="11" text-anchor="end">{_fmt(yt)}</text>')
    xl = xlabel + (" (log)" if xlog else "")
    yl = ylabel + (" (log)" if ylog else "")
    out.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 20}" font-size="13" text-anchor="middle">{escape(xl)}</text>')
    out.append(
        f'<text x="18" y="{HEIGHT / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {HEIGHT / 2:.1f})">{escape(yl)}</text>'
    )
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="30" font-size="15" text-anchor="middle">{escape(title)}</text>')
    for x, y in points:
        out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3.5" fill="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def points_for(kind: str, reports: list[dict]) -> list[tuple[float, float]]:
    """Extract plot points from report dicts (as loaded from JSON)."""
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    if kind == "error_vs_k":
        pts = []
        for r in reports:
            err = r.get("rel_err_exact")
            if err is None:
                err = r["rel_err_sampled"]
            pts.append((r["k"], max(err, 1e-300)))
        return pts
    if kind == "flops_vs_n":
        return [(r["n"], r["flops"]) for r in reports]
    # success rate per b, success meaning converged
    by_b: dict[int, list[bool]] = {}
    for r in reports:
        by_b.setdefault(r["b"], []).append(bool(r["converged"]))
    return [(b, sum(v) / len(v)) for b, v in sorted(by_b.items())]


def render(kind: str, reports: list[dict]) -> str:
    _, _, xlabel, ylabel = KINDS[kind]
    return svg_scatter(points_for(kind, reports), xlabel, ylabel, title=kind)
