"""Plain-text tables for columns and contours (debugging and golden files).

Columns, one line per segment::

    body,q,r,x_mm,y_mm,z_low_mm,z_high_mm

Contours, one line per vertex (the closing vertex is written explicitly)::

    contour,hole,vertex,x_mm,y_mm
"""
from __future__ import annotations

import csv
import io

from ..errors import GeometryError
from .raster import Column
from .silhouette import Contour

COLUMN_HEADER = ["body", "q", "r", "x_mm", "y_mm", "z_low_mm", "z_high_mm"]
CONTOUR_HEADER = ["contour", "hole", "vertex", "x_mm", "y_mm"]


def _f(v: float) -> str:
    return f"{v:.6f}"


def dump_columns(columns) -> str:
    lines = [",".join(COLUMN_HEADER)]
    for c in columns:
        for lo, hi in c.segments:
            lines.append(
                f"{c.body},{c.cell[0]},{c.cell[1]},{_f(c.center[0])},{_f(c.center[1])},{_f(lo)},{_f(hi)}"
            )
    return "\n".join(lines) + "\n"


def load_columns(text: str) -> list[Column]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != COLUMN_HEADER:
        raise GeometryError("column table: bad or missing header")
    grouped: dict[tuple, list] = {}
    order = []
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            body, q, r = int(row[0]), int(row[1]), int(row[2])
            x, y, lo, hi = (float(v) for v in row[3:7])
        except (ValueError, IndexError):
            raise GeometryError(f"column table line {n}: malformed record") from None
        key = (body, q, r)
        if key not in grouped:
            grouped[key] = [(x, y), []]
            order.append(key)
        grouped[key][1].append((lo, hi))
    return [Column((k[1], k[2]), grouped[k][0], tuple(grouped[k][1]), k[0]) for k in order]


def dump_contours(contours) -> str:
    lines = [",".join(CONTOUR_HEADER)]
    for i, c in enumerate(contours):
        for k, (x, y) in enumerate(c.points):
            lines.append(f"{i},{int(c.hole)},{k},{_f(x)},{_f(y)}")
    return "\n".join(lines) + "\n"


def load_contours(text: str) -> list[Contour]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CONTOUR_HEADER:
        raise GeometryError("contour table: bad or missing header")
    pts: dict[int, list] = {}
    holes: dict[int, bool] = {}
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            i, hole = int(row[0]), bool(int(row[1]))
            x, y = float(row[3]), float(row[4])
        except (ValueError, IndexError):
            raise GeometryError(f"contour table line {n}: malformed record") from None
        pts.setdefault(i, []).append((x, y))
        holes[i] = hole
    return [Contour(tuple(pts[i]), holes[i]) for i in sorted(pts)]
