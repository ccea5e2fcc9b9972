"""Deterministic SVG drawings of point families and tiles (d <= 2)."""
from __future__ import annotations

import numpy as np

from .errors import UnsupportedDimension
from .multiset import MultisetFamily

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _f(v: float) -> str:
    return f"{v:.3f}"


def _header(width, height):
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']


def _extent_1d(points, tiles):
    xs = []
    if points is not None:
        for X in points:
            xs.extend(X.coords()[:, 0].tolist() if X else [])
    for t in tiles or ():
        for a, b in t.intervals:
            xs.extend([float(a), float(b)])
    if not xs:
        return None
    lo, hi = min(xs), max(xs)
    if hi == lo:
        lo, hi = lo - 1, hi + 1
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def render_svg(points: MultisetFamily | None = None, tiles=None, width: int = 800,
               row_height: int = 60, unit: float = 6.0, mode=None) -> str:
    """SVG text for points (by color) and/or tiles.

    One-dimensional families are drawn one row per color, each point as a
    tick stack whose height is its multiplicity; tiles get their own rows as
    filled bars.  Two-dimensional points are dots scaled by multiplicity and
    tiles are filled cells.
    """
    dims = set()
    if points is not None and points.dim is not None:
        dims.add(points.dim)
    for t in tiles or ():
        dims.add(t.d)
    if any(d > 2 for d in dims):
        raise UnsupportedDimension("rendering supports d <= 2")
    d = dims.pop() if dims else 1
    if d == 1:
        return _render_1d(points, tiles, width, row_height, unit)
    return _render_2d(points, tiles, width)


def _render_1d(points, tiles, width, row_height, unit):
    rows = (len(tiles) if tiles else 0) + (points.n if points is not None else 0)
    height = max(row_height * rows + 20, 40)
    out = _header(width, height)
    ext = _extent_1d(points, tiles)
    if ext is None:
        out.append("</svg>")
        return "\n".join(out) + "\n"
    lo, hi = ext
    sx = lambda x: 10 + (x - lo) / (hi - lo) * (width - 20)  # noqa: E731
    row = 0
    for t in tiles or ():
        base = 10 + row_height * (row + 1) - 10
        color = PALETTE[t.color % len(PALETTE)]
        out.append(f'<g class="tile" data-color="{t.color + 1}">')
        for a, b in t.intervals:
            x0, x1 = sx(float(a)), sx(float(b))
            out.append(f'<rect x="{_f(x0)}" y="{_f(base - 12)}" width="{_f(max(x1 - x0, 0.5))}" '
                       f'height="12" fill="{color}" fill-opacity="0.5"/>')
        out.append("</g>")
        row += 1
    if points is not None:
        for i, X in enumerate(points):
            base = 10 + row_height * (row + 1) - 10
            color = PALETTE[i % len(PALETTE)]
            out.append(f'<g class="points" data-color="{i + 1}">')
            out.append(f'<line x1="10" y1="{_f(base)}" x2="{width - 10}" y2="{_f(base)}" '
                       f'stroke="#999" stroke-width="0.5"/>')
            for p, m in X.sorted_items():
                x = sx(X.mode.to_float(p[0]))
                for k in range(m):
                    y1 = base - k * unit
                    out.append(f'<line x1="{_f(x)}" y1="{_f(y1)}" x2="{_f(x)}" '
                               f'y2="{_f(y1 - unit + 1)}" stroke="{color}" stroke-width="1.5"/>')
            out.append("</g>")
            row += 1
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _render_2d(points, tiles, width):
    height = width
    out = _header(width, height)
    boxes = []
    if points is not None:
        for X in points:
            if X:
                c = X.coords()
                boxes.append((c.min(axis=0), c.max(axis=0)))
    for t in tiles or ():
        b = t.bounds()
        if b is not None:
            boxes.append((np.array(b[0]), np.array(b[1])))
    if not boxes:
        out.append("</svg>")
        return "\n".join(out) + "\n"
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    span = float(max(hi - lo)) or 2.0
    lo = lo - 0.05 * span
    span *= 1.1
    s = (width - 20) / span
    px = lambda x, y: (10 + (x - lo[0]) * s, height - 10 - (y - lo[1]) * s)  # noqa: E731
    for t in tiles or ():
        color = PALETTE[t.color % len(PALETTE)]
        B = t.bitmap
        step = max(1, int(np.ceil(max(B.shape) / 200)))
        out.append(f'<g class="tile" data-color="{t.color + 1}">')
        for r in range(0, B.shape[0], step):
            for c in range(0, B.shape[1], step):
                if B[r:r + step, c:c + step].any():
                    x0 = t.origin[0] + r * t.h
                    y0 = t.origin[1] + c * t.h
                    X0, Y0 = px(x0, y0 + step * t.h)
                    w = step * t.h * s
                    out.append(f'<rect x="{_f(X0)}" y="{_f(Y0)}" width="{_f(w)}" height="{_f(w)}" '
                               f'fill="{color}" fill-opacity="0.4"/>')
        out.append("</g>")
    if points is not None:
        for i, X in enumerate(points):
            color = PALETTE[i % len(PALETTE)]
            out.append(f'<g class="points" data-color="{i + 1}">')
            for p, m in X.sorted_items():
                x, y = (X.mode.to_float(c) for c in p)
                X0, Y0 = px(x, y)
                out.append(f'<circle cx="{_f(X0)}" cy="{_f(Y0)}" r="{_f(1.5 + m)}" fill="{color}"/>')
            out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
