"""Minimal static SVG line plots (no plotting dependency)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 480
MARGIN = dict(left=80, right=170, top=40, bottom=60)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _fmt(v):
    return f"{v:.2f}"


def line_plot_svg(series, title="", xlabel="", ylabel="", xlog=True, ylog=True, ref_slopes=()):
    """Render ``{label: (xs, ys)}`` as one polyline per series.

    Non-finite or (on log axes) non-positive points are skipped.
    ``ref_slopes`` adds a labelled reference triangle per slope.
    """
    tx = (lambda v: math.log10(v)) if xlog else (lambda v: v)
    ty = (lambda v: math.log10(v)) if ylog else (lambda v: v)

    def ok(x, y):
        good = math.isfinite(x) and math.isfinite(y)
        return good and (not xlog or x > 0) and (not ylog or y > 0)

    clean = {k: [(tx(x), ty(y)) for x, y in zip(*v) if ok(x, y)] for k, v in series.items()}
    pts = [p for v in clean.values() for p in v]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad_y = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad_y, y1 + pad_y
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(u):
        return MARGIN["left"] + (u - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN["top"] + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-size="13">{escape(xlabel)}</text>',
        f'<text x="18" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for k in range(5):
        u = x0 + k * (x1 - x0) / 4
        v = y0 + k * (y1 - y0) / 4
        xl = f"{10 ** u:.3g}" if xlog else f"{u:.3g}"
        yl = f"{10 ** v:.3g}" if ylog else f"{v:.3g}"
        out.append(f'<text x="{_fmt(sx(u))}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle" '
                   f'font-size="11">{xl}</text>')
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{_fmt(sy(v) + 4)}" text-anchor="end" '
                   f'font-size="11">{yl}</text>')

    for i, (label, p) in enumerate(clean.items()):
        color = COLORS[i % len(COLORS)]
        if p:
            coords = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in p)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}">'
                       f'<title>{escape(label)}</title></polyline>')
            for a, b in p:
                out.append(f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="3" fill="{color}"/>')
        ly = MARGIN["top"] + 16 + 18 * i
        lx = WIDTH - MARGIN["right"] + 10
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}" font-size="11">{escape(label)}</text>')

    if xlog and ylog and pts:
        # reference triangles in the lower-right corner of the data range
        for j, slope in enumerate(ref_slopes):
            run = 0.25 * (x1 - x0)
            bx = x1 - 0.05 * (x1 - x0) - run
            by = y0 + (0.08 + 0.3 * j) * (y1 - y0)
            rise = slope * run
            if by + rise > y1:
                continue
            tri = [(bx, by), (bx + run, by), (bx + run, by + rise)]
            coords = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in tri)
            out.append(f'<polygon points="{coords}" fill="none" stroke="gray" stroke-dasharray="4,3"/>')
            out.append(f'<text x="{_fmt(sx(bx + run) + 4)}" y="{_fmt(sy(by + rise / 2))}" '
                       f'font-size="11" fill="gray">slope {slope:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
