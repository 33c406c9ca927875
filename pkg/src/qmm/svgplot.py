"""Dependency-free SVG line plots: a frame, a few ticks, one polyline per series."""

from __future__ import annotations

from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(first, hi + 0.5 * step, step) if lo - 1e-12 <= v <= hi + 1e-12]


def _segments(x: np.ndarray, y: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split at non-finite samples so gaps stay gaps."""
    ok = np.isfinite(x) & np.isfinite(y)
    out = []
    start = None
    for i, good in enumerate(ok):
        if good and start is None:
            start = i
        elif not good and start is not None:
            out.append((x[start:i], y[start:i]))
            start = None
    if start is not None:
        out.append((x[start:], y[start:]))
    return out


def line_plot_svg(x: Sequence[float], series: Mapping[str, Sequence[float]], *,
                  title: str = "", x_label: str = "t", width: int = 900, height: int = 320,
                  max_points: int = 4000) -> str:
    """Render ``series`` against ``x`` as an SVG document string."""
    x = np.asarray(x, float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("need at least two x samples")
    stride = max(1, len(x) // max_points)
    xs = x[::stride]
    ys = {name: np.asarray(v, float)[::stride] for name, v in series.items()}
    for name, v in ys.items():
        if v.shape != xs.shape:
            raise ValueError(f"series {name!r} does not match x")

    left, right, top, bottom = 60, 20, 30, 45
    pw, ph = width - left - right, height - top - bottom
    finite = np.concatenate([v[np.isfinite(v)] for v in ys.values()] + [np.zeros(0)])
    y_lo, y_hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = float(xs[0]), float(xs[-1])

    def sx(v):
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return top + (y_hi - v) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _nice_ticks(x_lo, x_hi):
        px = sx(v)
        parts.append(f'<line x1="{px:.2f}" y1="{top + ph}" x2="{px:.2f}" y2="{top + ph + 4}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{top + ph + 16}" text-anchor="middle">{v:g}</text>')
    for v in _nice_ticks(y_lo, y_hi):
        py = sy(v)
        parts.append(f'<line x1="{left - 4}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 6}" y="{py + 4:.2f}" text-anchor="end">{v:g}</text>')
    parts.append(f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(x_label)}</text>')
    if title:
        parts.append(f'<text x="{left + pw / 2:.1f}" y="{top - 10}" text-anchor="middle" '
                     f'font-size="13">{escape(title)}</text>')

    for k, (name, y) in enumerate(ys.items()):
        colour = COLOURS[k % len(COLOURS)]
        for sxs, sys_ in _segments(xs, y):
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(sxs, sys_))
            parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1" points="{pts}"/>')
        ly = top + 14 + 14 * k
        parts.append(f'<line x1="{left + pw - 110}" y1="{ly - 4}" x2="{left + pw - 92}" y2="{ly - 4}" '
                     f'stroke="{colour}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw - 88}" y="{ly}">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
