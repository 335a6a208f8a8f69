"""Hand-emitted SVG line charts (no plotting dependency).

One chart type is needed: a log-log scatter of lifespans against 1/epsilon
with the fitted line and a guide line at the predicted slope.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 55


def _transform(xs, ys):
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = 0.05 * (x_hi - x_lo or 1.0)
    y_pad = 0.10 * (y_hi - y_lo or 1.0)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    return px, py, (x_lo, x_hi, y_lo, y_hi)


def scaling_plot_svg(eps: Sequence[float], lifespans: Sequence[float],
                     fitted_slope: float, fitted_intercept: float,
                     predicted_slope: Optional[float] = None,
                     title: str = "lifespan scaling") -> str:
    """Scatter of (ln 1/eps, ln T) with the fitted line and a predicted-slope guide."""
    xs = [math.log(1.0 / e) for e in eps]
    ys = [math.log(t) for t in lifespans]
    px, py, (x_lo, x_hi, y_lo, y_hi) = _transform(xs, ys)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        # axes
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 14}" text-anchor="middle">ln(1/eps)</text>',
        f'<text x="18" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.1f})">ln(T)</text>',
    ]
    # axis extreme labels
    parts.append(f'<text x="{_ML}" y="{_H - _MB + 16}" text-anchor="middle">{x_lo:.2f}</text>')
    parts.append(f'<text x="{_W - _MR}" y="{_H - _MB + 16}" text-anchor="middle">{x_hi:.2f}</text>')
    parts.append(f'<text x="{_ML - 6}" y="{_H - _MB + 4}" text-anchor="end">{y_lo:.2f}</text>')
    parts.append(f'<text x="{_ML - 6}" y="{_MT + 4}" text-anchor="end">{y_hi:.2f}</text>')

    def line_points(slope, intercept):
        return (px(x_lo), py(slope * x_lo + intercept), px(x_hi), py(slope * x_hi + intercept))

    x1, y1, x2, y2 = line_points(fitted_slope, fitted_intercept)
    parts.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
                 f'stroke="steelblue" stroke-width="1.5"/>')
    parts.append(f'<text x="{_W - _MR - 4}" y="{_MT + 16}" text-anchor="end" fill="steelblue">'
                 f'fit slope {fitted_slope:.4f}</text>')
    if predicted_slope is not None:
        # guide through the first data point at the predicted slope
        guide_intercept = ys[0] - predicted_slope * xs[0]
        x1, y1, x2, y2 = line_points(predicted_slope, guide_intercept)
        parts.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
                     f'stroke="firebrick" stroke-width="1.2" stroke-dasharray="6,4"/>')
        parts.append(f'<text x="{_W - _MR - 4}" y="{_MT + 32}" text-anchor="end" fill="firebrick">'
                     f'predicted {predicted_slope:.4f}</text>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3.5" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
