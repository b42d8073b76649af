"""Minimal self-contained SVG line charts.

Deliberately dependency-free: the sweep command emits static result figures,
so a small hand-rolled vector writer is all that is needed.  Layout is fixed:
left/bottom axes with ticks, light horizontal gridlines, one polyline per
curve and a legend block in the top-right corner.
"""

from __future__ import annotations

import math

_WIDTH, _HEIGHT = 720, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 72, 24, 44, 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(round(t, 12))
        t += step
    return out or [lo, hi]


def write_line_plot(path, curves, title="", xlabel="", ylabel=""):
    """Write a line chart to ``path``.

    ``curves`` is a list of (label, xs, ys) with xs sorted ascending.
    """
    xs_all = [x for _, xs, _ in curves for x in xs]
    ys_all = [y for _, _, ys in curves for y in ys]
    if not xs_all:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    y_pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    px_w = _WIDTH - _MARGIN_L - _MARGIN_R
    px_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x):
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * px_w

    def sy(y):
        return _MARGIN_T + px_h - (y - y_lo) / (y_hi - y_lo) * px_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        '<g font-family="Helvetica, Arial, sans-serif" font-size="12" fill="#222">',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
            f'font-size="15">{_esc(title)}</text>'
        )

    for ty in _ticks(y_lo, y_hi):
        y = sy(ty)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{y:.2f}" x2="{_WIDTH - _MARGIN_R}" y2="{y:.2f}" '
            f'stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_L - 8}" y="{y + 4:.2f}" text-anchor="end">{ty:g}</text>'
        )
    for tx in _ticks(x_lo, x_hi):
        x = sx(tx)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_T + px_h}" x2="{x:.2f}" '
            f'y2="{_MARGIN_T + px_h + 5}" stroke="#222" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_MARGIN_T + px_h + 20}" text-anchor="middle">{tx:g}</text>'
        )

    # axes
    parts.append(
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
        f'y2="{_MARGIN_T + px_h}" stroke="#222" stroke-width="1.5"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T + px_h}" x2="{_WIDTH - _MARGIN_R}" '
        f'y2="{_MARGIN_T + px_h}" stroke="#222" stroke-width="1.5"/>'
    )
    if xlabel:
        parts.append(
            f'<text x="{_MARGIN_L + px_w / 2:.1f}" y="{_HEIGHT - 14}" '
            f'text-anchor="middle">{_esc(xlabel)}</text>'
        )
    if ylabel:
        cy = _MARGIN_T + px_h / 2
        parts.append(
            f'<text x="18" y="{cy:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 18 {cy:.1f})">{_esc(ylabel)}</text>'
        )

    for idx, (label, xs, ys) in enumerate(curves):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )

    # legend
    lx = _WIDTH - _MARGIN_R - 170
    ly = _MARGIN_T + 10
    parts.append(
        f'<rect x="{lx - 8}" y="{ly - 14}" width="178" height="{18 * len(curves) + 10}" '
        f'fill="white" stroke="#bbb"/>'
    )
    for idx, (label, _, _) in enumerate(curves):
        color = _COLORS[idx % len(_COLORS)]
        y = ly + idx * 18
        parts.append(
            f'<line x1="{lx}" y1="{y - 4}" x2="{lx + 26}" y2="{y - 4}" '
            f'stroke="{color}" stroke-width="1.8"/>'
        )
        parts.append(f'<text x="{lx + 34}" y="{y}">{_esc(label)}</text>')

    parts.append("</g></svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
