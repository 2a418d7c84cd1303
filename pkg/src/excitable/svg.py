"""Tiny SVG line-plot renderer (axes, polylines, shaded bands)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f4e9c", "#d1495b", "#edae49", "#00798c", "#66a182", "#8d6a9f", "#2e4057", "#c3423f", "#6b8f71", "#ba7ba1"]


def _decimate(x, y, max_points):
    if len(x) <= max_points:
        return x, y
    step = int(np.ceil(len(x) / max_points))
    return x[::step], y[::step]


def _bands_from_mask(t, mask):
    edges = np.diff(np.concatenate(([0], mask.astype(int), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return [(t[a], t[b]) for a, b in zip(starts, stops)]


def line_plot(series, *, title="", xlabel="t", ylabel="", bands=(), hlines=(), width=800, height=300, max_points=2000) -> str:
    """``series`` is a list of (x, y) or (x, y, color); ``bands`` are (x0, x1) spans."""
    ml, mr, mt, mb = 60, 15, 30, 40
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[1], dtype=float) for s in series] + [np.asarray(hlines, dtype=float)])
    ys = ys[np.isfinite(ys)]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = (float(ys.min()), float(ys.max())) if len(ys) else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(x):
        return ml + (np.asarray(x) - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + (y1 - np.asarray(y)) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for a, b in bands:
        out.append(f'<rect x="{sx(a):.2f}" y="{mt}" width="{max(sx(b) - sx(a), 0.5):.2f}" height="{ph}" fill="#cfe8fa"/>')
    for h in hlines:
        out.append(f'<line x1="{ml}" x2="{ml + pw}" y1="{sy(h):.2f}" y2="{sy(h):.2f}" stroke="#d1495b" stroke-dasharray="4,3"/>')
    for k, s in enumerate(series):
        x, y = _decimate(np.asarray(s[0], dtype=float), np.asarray(s[1], dtype=float), max_points)
        color = s[2] if len(s) > 2 else PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(x), sy(y)))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for v in np.linspace(x0, x1, 5):
        out.append(f'<text x="{sx(v):.1f}" y="{mt + ph + 15}" font-size="10" text-anchor="middle">{v:.4g}</text>')
    for v in np.linspace(y0, y1, 5):
        out.append(f'<text x="{ml - 5}" y="{sy(v) + 3:.1f}" font-size="10" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 8}" font-size="11" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {mt + ph / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{ml}" y="18" font-size="12">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
