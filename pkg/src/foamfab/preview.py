"""Layered SVG preview of a sliced job.

Layers, bottom to top: foam outline, injected hexagons (one fill colour per
print file), body silhouettes, injection-order labels. Coordinates are in
millimetres with the foam's minimum corner at the bottom left.
"""
from __future__ import annotations

import colorsys
from xml.sax.saxutils import escape

PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)


def file_color(index: int) -> str:
    if index < len(PALETTE):
        return PALETTE[index]
    h = (index * 0.618033988749895) % 1.0
    r, g, b = colorsys.hls_to_rgb(h, 0.55, 0.6)
    return f"#{round(r * 255):02x}{round(g * 255):02x}{round(b * 255):02x}"


def _n(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_preview(foam, cells, contours=(), title: str = "foamfab preview") -> str:
    """``cells`` is a list of ``(column, grid, file_index)`` in injection order."""
    W, D = foam.width, foam.depth
    margin = 0.05 * max(W, D)

    def pt(x: float, y: float) -> str:
        return f"{_n(x)},{_n(D - y)}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(W + 2 * margin)}mm" '
        f'height="{_n(D + 2 * margin)}mm" viewBox="{_n(-margin)} {_n(-margin)} '
        f'{_n(W + 2 * margin)} {_n(D + 2 * margin)}">',
        f"<title>{escape(title)}</title>",
        '<g id="foam">',
        f'<rect class="foam" x="0" y="0" width="{_n(W)}" height="{_n(D)}" '
        'fill="#fbf7ef" stroke="#333333" stroke-width="0.3"/>',
        "</g>",
        '<g id="cells" stroke="#ffffff" stroke-width="0.05">',
    ]
    for column, grid, f in cells:
        poly = " ".join(pt(x, y) for x, y in grid.hexagon(*column.cell))
        out.append(
            f'<polygon class="cell" data-file="{f + 1}" data-cell="{column.cell[0]},{column.cell[1]}" '
            f'points="{poly}" fill="{file_color(f)}"/>'
        )
    out.append("</g>")
    out.append('<g id="silhouettes" fill="none" stroke="#111111" stroke-width="0.2">')
    for c in contours:
        d = "M " + " L ".join(pt(x, y) for x, y in c.points[:-1]) + " Z"
        dash = ' stroke-dasharray="0.8,0.4"' if c.hole else ""
        out.append(f'<path class="silhouette" d="{d}"{dash}/>')
    out.append("</g>")
    out.append('<g id="order" font-family="sans-serif" text-anchor="middle" fill="#000000">')
    for k, (column, grid, _) in enumerate(cells, start=1):
        x, y = column.center
        size = 0.45 * grid.side
        out.append(
            f'<text class="order" x="{_n(x)}" y="{_n(D - y + 0.35 * size)}" '
            f'font-size="{_n(size)}">{k}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
