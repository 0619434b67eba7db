"""Static SVG line plots emitted as plain text.

Output is a pure function of the inputs (fixed float formatting, no
timestamps), so identical data produce byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 30, 40, 60
COLORS = ("#1f4e99", "#c0392b", "#2e8b57", "#8e44ad")
MAX_POINTS = 4000


@dataclass(frozen=True)
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Ticks at 1, 2 or 5 times a power of ten covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("non-finite axis range")
    if hi - lo <= 1e-12 * max(abs(lo), abs(hi), 1e-300):
        pad = abs(lo) * 0.05 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.floor(lo / step) * step
    ticks = []
    k = 0
    while True:
        t = first + k * step
        ticks.append(round(t / step) * step)
        if t >= hi - 1e-12 * step:
            break
        k += 1
    return ticks


def _fmt(v: float) -> str:
    s = f"{v:.6g}"
    return "0" if s in ("-0", "0") else s


def _thin(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(x) <= MAX_POINTS:
        return x, y
    idx = np.unique(np.linspace(0, len(x) - 1, MAX_POINTS).astype(int))
    return x[idx], y[idx]


def line_plot(series: list[Series], title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Render one polyline per series on shared axes."""
    if not series:
        raise ValueError("nothing to plot")
    for s in series:
        if len(s.x) != len(s.y) or len(s.x) == 0:
            raise ValueError(f"series {s.label!r}: x and y must be non-empty and of equal length")
    xs = np.concatenate([np.asarray(s.x, float) for s in series])
    ys = np.concatenate([np.asarray(s.y, float) for s in series])
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("non-finite data")
    xt = nice_ticks(float(xs.min()), float(xs.max()))
    yt = nice_ticks(float(ys.min()), float(ys.max()))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(v):
        return MARGIN_LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN_TOP + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xt:
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{MARGIN_TOP + ph}" x2="{X:.2f}" y2="{MARGIN_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{MARGIN_TOP + ph + 20}" text-anchor="middle">{_fmt(t)}</text>')
    for t in yt:
        Y = py(t)
        out.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{Y:.2f}" x2="{MARGIN_LEFT}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{MARGIN_LEFT + pw / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        cy = MARGIN_TOP + ph / 2
        out.append(f'<text x="20" y="{cy:.0f}" text-anchor="middle" transform="rotate(-90 20 {cy:.0f})">{escape(ylabel)}</text>')

    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        x, y = _thin(np.asarray(s.x, float), np.asarray(s.y, float))
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2"{dash} points="{pts}"/>')
        ly = MARGIN_TOP + 16 + 16 * i
        lx = MARGIN_LEFT + pw - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}"{dash}/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
