"""Minimal static SVG line charts with logarithmic axes."""

from __future__ import annotations

import math
from typing import Dict, Sequence, Tuple
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 50


def _decades(lo: float, hi: float):
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    if a == b:
        b += 1
    return a, b


def line_chart(series: Dict[str, Tuple[Sequence[float], Sequence[float]]],
               title: str, xlabel: str, ylabel: str) -> str:
    """Render ``{name: (xs, ys)}`` on log-log axes; non-positive points are dropped."""
    clean = {}
    for name, (xs, ys) in series.items():
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if x > 0 and y > 0 and math.isfinite(y)]
        if pts:
            clean[name] = pts
    allx = [p[0] for pts in clean.values() for p in pts] or [1.0, 10.0]
    ally = [p[1] for pts in clean.values() for p in pts] or [1.0, 10.0]
    xa, xb = _decades(min(allx), max(allx))
    ya, yb = _decades(min(ally), max(ally))
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + pw * (math.log10(x) - xa) / (xb - xa)

    def py(y):
        return TOP + ph * (1.0 - (math.log10(y) - ya) / (yb - ya))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="{TOP - 15}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    ystep = max(1, (yb - ya) // 8)
    for e in range(xa, xb + 1):
        x = px(10.0 ** e)
        out.append(f'<line x1="{x:.1f}" y1="{TOP}" x2="{x:.1f}" y2="{TOP + ph}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.1f}" y="{TOP + ph + 18}" text-anchor="middle">1e{e}</text>')
    for e in range(ya, yb + 1, ystep):
        y = py(10.0 ** e)
        out.append(f'<line x1="{LEFT}" y1="{y:.1f}" x2="{LEFT + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y + 4:.1f}" text-anchor="end">1e{e}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (name, pts) in enumerate(clean.items()):
        color = PALETTE[i % len(PALETTE)]
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        ly = TOP + 16 + 18 * i
        out.append(f'<line x1="{LEFT + pw + 12}" y1="{ly}" x2="{LEFT + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw + 38}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def convergence_chart(traces: Dict[str, Sequence], title: str) -> str:
    """Objective against iteration (``k + 1``) for one or more traces.

    When some value is not positive the curves show ``f - min f`` instead.
    """
    fmin = min((r.f_value for t in traces.values() for r in t), default=1.0)
    shift = fmin if fmin <= 0 else 0.0
    series = {
        name: ([r.k + 1 for r in t], [r.f_value - shift for r in t])
        for name, t in traces.items()
    }
    ylabel = "f(x_k)" if shift == 0.0 else "f(x_k) - min f"
    return line_chart(series, title, "iteration k + 1", ylabel)
