"""Column rasterisation of solid bodies onto a hex grid."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import GeometryError
from .grid import FoamBlock, HexGrid
from .mesh import TriangleMesh, points_in_solid, vertical_hits

Z_EPS = 1e-9
# Heights are snapped to the 1 um resolution of the emitted G-code so planned
# volumes match what a machine reading the file dispenses.
Z_QUANTUM_DECIMALS = 3


@dataclass(frozen=True)
class BodySpec:
    mesh: TriangleMesh
    infill_ratio: float = 1.0
    hydration_ratio: float = 0.5
    name: str = "body"

    def __post_init__(self):
        if not 0 < self.infill_ratio <= 1:
            raise GeometryError(f"{self.name}: infill ratio must be in (0, 1], got {self.infill_ratio}")
        if not 0 < self.hydration_ratio <= 1:
            raise GeometryError(
                f"{self.name}: hydration ratio must be in (0, 1], got {self.hydration_ratio}"
            )

    def check_inside(self, foam: FoamBlock, tol: float = 1e-6) -> None:
        if self.mesh.is_empty:
            return
        lo, hi = self.mesh.bounds()
        upper = np.array([foam.width, foam.depth, foam.height])
        if (lo < -tol).any() or (hi > upper + tol).any():
            raise GeometryError(
                f"{self.name}: bounding box {lo.round(3).tolist()}..{hi.round(3).tolist()} "
                f"is not inside the foam block {upper.tolist()}"
            )


@dataclass(frozen=True)
class Column:
    """One injection cell: where the needle goes and which heights get gel."""

    cell: tuple[int, int]
    center: tuple[float, float]
    segments: tuple[tuple[float, float], ...]
    body: int = field(default=0, compare=True)

    @property
    def length(self) -> float:
        return sum(hi - lo for lo, hi in self.segments)

    def volume(self, cell_area: float) -> float:
        return cell_area * self.length

    @property
    def bottom(self) -> float:
        return self.segments[0][0]

    @property
    def top(self) -> float:
        return self.segments[-1][1]


def segments_from_hits(z: np.ndarray, z_min: float = 0.0, z_max: float = math.inf):
    """Pair sorted crossing heights into clipped, merged inside-intervals."""
    out: list[list[float]] = []
    for k in range(0, len(z) - 1, 2):
        lo = round(max(float(z[k]), z_min), Z_QUANTUM_DECIMALS)
        hi = round(min(float(z[k + 1]), z_max), Z_QUANTUM_DECIMALS)
        if hi - lo <= Z_EPS:
            continue
        if out and lo - out[-1][1] <= Z_EPS:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def _sampled_segments(mesh: TriangleMesh, x: float, y: float, z_step: float, z_lo: float, z_hi: float):
    n = max(1, math.ceil((z_hi - z_lo) / z_step))
    step = (z_hi - z_lo) / n
    zc = z_lo + step * (np.arange(n) + 0.5)
    inside = points_in_solid(mesh, np.column_stack([np.full(n, x), np.full(n, y), zc]))
    out = []
    k = 0
    while k < n:
        if inside[k]:
            j = k
            while j + 1 < n and inside[j + 1]:
                j += 1
            out.append(
                (
                    round(z_lo + step * k, Z_QUANTUM_DECIMALS),
                    round(z_lo + step * (j + 1), Z_QUANTUM_DECIMALS),
                )
            )
            k = j + 1
        else:
            k += 1
    return tuple(out)


def rasterize(body: BodySpec, grid: HexGrid, z_step: float = 0.5, body_index: int = 0) -> list[Column]:
    """Columns of ``grid`` whose centre axis passes through ``body``.

    Segments come from exact vertical ray/mesh crossings; ``z_step`` sampling is
    used only for axes whose crossings stay degenerate after perturbation.
    Output is sorted by axial coordinates.
    """
    if not z_step > 0:
        raise GeometryError(f"z_step must be positive, got {z_step}")
    body.check_inside(grid.foam)
    mesh = body.mesh
    if mesh.is_empty:
        return []
    lo, hi = mesh.bounds()
    cells = [c for c in grid.cells]
    if not cells:
        return []
    centers = grid.centers(cells)
    keep = (
        (centers[:, 0] >= lo[0] - 1e-6)
        & (centers[:, 0] <= hi[0] + 1e-6)
        & (centers[:, 1] >= lo[1] - 1e-6)
        & (centers[:, 1] <= hi[1] + 1e-6)
    )
    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        return []
    hits, degenerate = vertical_hits(mesh, centers[idx])
    z_top = grid.foam.height
    columns = []
    for k, i in enumerate(idx):
        x, y = float(centers[i, 0]), float(centers[i, 1])
        if degenerate[k]:
            segs = _sampled_segments(mesh, x, y, z_step, float(lo[2]), float(hi[2]))
        else:
            segs = segments_from_hits(hits[k], 0.0, z_top)
        if segs:
            columns.append(Column(cells[i], (x, y), segs, body_index))
    return columns


def check_overlaps(bodies, columns_per_body) -> None:
    """Reject body pairs whose interiors share injected material."""
    for a, cols in enumerate(columns_per_body):
        if not cols:
            continue
        xy = np.array([c.center for c in cols])
        for b, other in enumerate(bodies):
            if b == a or other.mesh.is_empty:
                continue
            hits, degenerate = vertical_hits(other.mesh, xy)
            for col, z, deg in zip(cols, hits, degenerate):
                if deg:
                    continue
                for lo2, hi2 in segments_from_hits(z):
                    for lo1, hi1 in col.segments:
                        if min(hi1, hi2) - max(lo1, lo2) > 1e-6:
                            raise GeometryError(
                                f"bodies {bodies[a].name!r} and {other.name!r} overlap at "
                                f"column {col.cell} (x={col.center[0]:.3f}, y={col.center[1]:.3f})"
                            )


def total_volume(columns, cell_area: float) -> float:
    return float(sum(c.volume(cell_area) for c in columns))
