"""Minimal SVG polyline plots for sweep and spectrum CSV output.

A plot is a pure function of the plotted columns: no timestamps, no
randomness, fixed canvas.  Good enough for eyeball checks of curve shapes;
anything quantitative should read the CSV.
"""

from __future__ import annotations

import math
from pathlib import Path

_WIDTH, _HEIGHT, _PAD = 720, 480, 54
_COLORS = ("#1b7837", "#2166ac", "#b2182b", "#762a83", "#e08214", "#35978f")


def _transform(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def render_lines(
    x,
    series: dict,
    xlabel: str = "",
    ylabel: str = "",
    log_y: bool = False,
) -> str:
    """SVG text for polylines sharing one x axis; series maps label -> values."""
    x = [float(v) for v in x]
    prepared = {}
    for label, values in series.items():
        ys = [float(v) for v in values]
        if log_y:
            ys = [math.log10(v) if v > 0 else math.nan for v in ys]
        prepared[label] = ys
    finite = [v for ys in prepared.values() for v in ys if math.isfinite(v)]
    if not finite or not x:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(x), max(x)
    y_lo, y_hi = min(finite), max(finite)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_WIDTH - 2 * _PAD}" '
        f'height="{_HEIGHT - 2 * _PAD}" fill="none" stroke="#888"/>',
    ]
    for i, (label, ys) in enumerate(prepared.items()):
        color = _COLORS[i % len(_COLORS)]
        px = _transform(x, x_lo, x_hi, _PAD, _WIDTH - _PAD)
        py = _transform(ys, y_lo, y_hi, _HEIGHT - _PAD, _PAD)
        points = " ".join(
            f"{a:.2f},{b:.2f}" for a, b, y in zip(px, py, ys) if math.isfinite(y)
        )
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
        parts.append(
            f'<text x="{_WIDTH - _PAD + 4}" y="{_PAD + 16 * (i + 1)}" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    y_label_text = f"log10({ylabel})" if log_y and ylabel else (ylabel or "")
    if xlabel:
        parts.append(
            f'<text x="{_WIDTH / 2:.0f}" y="{_HEIGHT - 14}" font-size="12" '
            f'text-anchor="middle">{xlabel}</text>'
        )
    if y_label_text:
        parts.append(
            f'<text x="16" y="{_HEIGHT / 2:.0f}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 16 {_HEIGHT / 2:.0f})">{y_label_text}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def write_svg(path, x, series: dict, **kwargs) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_lines(x, series, **kwargs))
    return path
