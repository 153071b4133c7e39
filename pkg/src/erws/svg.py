"""Minimal SVG line plots (axes, legend, polylines)."""
from __future__ import annotations

from typing import Sequence

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def line_plot(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], *,
              title: str = "", xlabel: str = "", ylabel: str = "",
              width: int = 640, height: int = 420, dashed: Sequence[bool] = ()) -> str:
    pad_l, pad_r, pad_t, pad_b = 60, 150, 30, 45
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys) * 1.05
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    w = width - pad_l - pad_r
    h = height - pad_t - pad_b

    def px(x):
        return pad_l + (x - x0) / (x1 - x0) * w

    def py(y):
        return pad_t + h - (y - y0) / (y1 - y0) * h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad_l}" y1="{pad_t + h}" x2="{pad_l + w}" y2="{pad_t + h}" stroke="black"/>',
           f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + h}" stroke="black"/>']
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{px(xv):.1f}" y="{pad_t + h + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{pad_l - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{pad_l + w / 2}" y="{height - 8}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="14" y="{pad_t + h / 2}" transform="rotate(-90 14 {pad_t + h / 2})" '
               f'text-anchor="middle">{ylabel}</text>')
    if title:
        out.append(f'<text x="{pad_l + w / 2}" y="18" text-anchor="middle">{title}</text>')
    for i, (label, sx, sy) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        dash = ' stroke-dasharray="5,3"' if i < len(dashed) and dashed[i] else ""
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(sx, sy))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{pts}"/>')
        ly = pad_t + 10 + 18 * i
        out.append(f'<line x1="{pad_l + w + 10}" y1="{ly}" x2="{pad_l + w + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{pad_l + w + 35}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
