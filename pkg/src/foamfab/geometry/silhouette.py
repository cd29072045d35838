"""Top-face outlines of bodies: occupancy grid + marching squares."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import GeometryError
from .raster import BodySpec

SUBSAMPLES = 5  # per axis, odd so a node's coverage is never exactly 1/2
LEVEL = 0.5


@dataclass(frozen=True)
class Contour:
    """Closed polyline on the foam top face; ``points[0] == points[-1]``."""

    points: tuple[tuple[float, float], ...]
    hole: bool = False

    def __post_init__(self):
        if len(self.points) < 4 or self.points[0] != self.points[-1]:
            raise GeometryError("contour must be closed with at least 3 distinct vertices")

    @property
    def closed(self) -> bool:
        return self.points[0] == self.points[-1]

    @property
    def perimeter(self) -> float:
        p = np.asarray(self.points)
        return float(np.hypot(*np.diff(p, axis=0).T).sum())

    @property
    def signed_area(self) -> float:
        p = np.asarray(self.points)
        return float(0.5 * np.sum(p[:-1, 0] * p[1:, 1] - p[1:, 0] * p[:-1, 1]))

    def contains(self, x: float, y: float) -> bool:
        """Even-odd test against the polygon."""
        p = self.points
        inside = False
        for (x0, y0), (x1, y1) in zip(p[:-1], p[1:]):
            if (y0 > y) != (y1 > y):
                xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
                if xc > x:
                    inside = not inside
        return inside

    def distance(self, x: float, y: float) -> float:
        """Distance from a point to the polyline."""
        p = np.asarray(self.points)
        a, b = p[:-1], p[1:]
        ab = b - a
        denom = np.einsum("ij,ij->i", ab, ab)
        t = np.clip(np.einsum("ij,ij->i", np.array([x, y]) - a, ab) / np.where(denom > 0, denom, 1), 0, 1)
        proj = a + ab * t[:, None]
        return float(np.hypot(proj[:, 0] - x, proj[:, 1] - y).min())


def coverage_grid(body: BodySpec, resolution: float):
    """Fractional projected occupancy sampled on a node lattice.

    Returns ``(values, x0, y0)``; node ``(i, j)`` sits at
    ``(x0 + i * resolution, y0 + j * resolution)`` and its value is the
    fraction of its ``resolution``-square that the body's projection covers.
    The lattice is anchored at multiples of ``resolution`` and padded by two
    empty nodes on every side.
    """
    lo, hi = body.mesh.bounds()
    i0 = math.floor(lo[0] / resolution) - 2
    j0 = math.floor(lo[1] / resolution) - 2
    i1 = math.ceil(hi[0] / resolution) + 2
    j1 = math.ceil(hi[1] / resolution) + 2
    nx, ny = i1 - i0 + 1, j1 - j0 + 1
    x0, y0 = i0 * resolution, j0 * resolution
    k = SUBSAMPLES
    sub = (np.arange(k) + 0.5) / k - 0.5
    gx = x0 + resolution * (np.arange(nx)[:, None] + sub[None, :])
    gy = y0 + resolution * (np.arange(ny)[:, None] + sub[None, :])
    px = np.broadcast_to(gx.reshape(nx, 1, k, 1), (nx, ny, k, k)).ravel()
    py = np.broadcast_to(gy.reshape(1, ny, 1, k), (nx, ny, k, k)).ravel()
    covered = kernels.projected_coverage(body.mesh.triangle_coords, px, py)
    values = covered.reshape(nx, ny, k * k).mean(axis=2)
    return values, x0, y0


# cell edges walked counter-clockwise: (corner_from, corner_to) as (di, dj)
_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))
_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0))


def _edge_key(i: int, j: int, c0: int, c1: int) -> tuple[int, int, int]:
    a = (i + _CORNERS[c0][0], j + _CORNERS[c0][1])
    b = (i + _CORNERS[c1][0], j + _CORNERS[c1][1])
    lo = min(a, b)
    return (lo[0], lo[1], 0 if a[1] == b[1] else 1)


def marching_squares(values: np.ndarray, level: float = LEVEL):
    """Closed iso-lines of ``values`` (indexed ``[i, j]``) in index space.

    Loops keep the region ``>= level`` on their left, so outer boundaries run
    counter-clockwise and holes clockwise. Saddle cells are resolved by the
    mean of the four corners.
    """
    nx, ny = values.shape
    inside = values >= level
    nxt: dict[tuple, tuple] = {}
    point: dict[tuple, tuple[float, float]] = {}
    mixed = np.zeros((nx - 1, ny - 1), dtype=bool)
    s = inside[:-1, :-1].astype(int) + inside[1:, :-1] + inside[1:, 1:] + inside[:-1, 1:]
    mixed = (s > 0) & (s < 4)
    for i, j in zip(*np.nonzero(mixed)):
        v = [values[i + di, j + dj] for di, dj in _CORNERS]
        ins = [x >= level for x in v]
        exits, entries = [], []
        for e, (c0, c1) in enumerate(_EDGES):
            if ins[c0] == ins[c1]:
                continue
            key = _edge_key(i, j, c0, c1)
            if key not in point:
                t = (level - v[c0]) / (v[c1] - v[c0])
                x = i + _CORNERS[c0][0] + t * (_CORNERS[c1][0] - _CORNERS[c0][0])
                y = j + _CORNERS[c0][1] + t * (_CORNERS[c1][1] - _CORNERS[c0][1])
                point[key] = (x, y)
            (exits if ins[c0] else entries).append((e, key))
        if len(exits) == 1:
            nxt[exits[0][1]] = entries[0][1]
            continue
        joined = sum(v) / 4.0 >= level
        for e, key in exits:
            if joined:
                # next entry going forward around the cell
                partner = min(entries, key=lambda en: (en[0] - e) % 4)
            else:
                partner = min(entries, key=lambda en: (e - en[0]) % 4)
            nxt[key] = partner[1]
    loops = []
    seen: set = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = []
        key = start
        while key not in seen:
            seen.add(key)
            loop.append(point[key])
            key = nxt[key]
        loops.append(loop)
    return loops


def _simplify(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    # drop repeated and collinear vertices of a closed ring (no closing duplicate)
    pts = []
    for p in points:
        if not pts or math.dist(p, pts[-1]) > 1e-12:
            pts.append(p)
    if len(pts) > 1 and math.dist(pts[0], pts[-1]) <= 1e-12:
        pts.pop()
    changed = True
    while changed and len(pts) > 3:
        changed = False
        out = []
        n = len(pts)
        for k in range(n):
            a, b, c = pts[k - 1], pts[k], pts[(k + 1) % n]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            scale = math.dist(a, b) * math.dist(b, c)
            if abs(cross) <= 1e-9 * max(scale, 1e-30):
                changed = True
                continue
            out.append(b)
        if changed:
            pts = out if len(out) >= 3 else pts
            if len(out) < 3:
                break
    return pts


def project_silhouette(body: BodySpec, resolution: float = 0.25) -> list[Contour]:
    """Outer boundaries and holes of the body's vertical projection."""
    if not resolution > 0:
        raise GeometryError(f"resolution must be positive, got {resolution}")
    if body.mesh.is_empty:
        return []
    values, x0, y0 = coverage_grid(body, resolution)
    contours = []
    for loop in marching_squares(values):
        ring = _simplify([(round(x0 + x * resolution, 9), round(y0 + y * resolution, 9)) for x, y in loop])
        if len(ring) < 3:
            continue
        k = min(range(len(ring)), key=lambda n: ring[n])
        ring = ring[k:] + ring[:k]
        ring.append(ring[0])
        c = Contour(tuple(ring), hole=False)
        contours.append(Contour(c.points, hole=c.signed_area < 0))
    contours.sort(key=lambda c: (c.hole, c.points[0]))
    return contours
