"""Pointy-top hexagonal lattice over the foam footprint."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import GeometryError

SQRT3 = math.sqrt(3.0)

# Axial neighbour offsets in lexicographic order; fixes enumeration everywhere.
HEX_DIRECTIONS: tuple[tuple[int, int], ...] = ((-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0))


@dataclass(frozen=True)
class FoamBlock:
    width: float
    depth: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.depth > 0 and self.height > 0):
            raise GeometryError(
                f"foam dimensions must be positive, got {self.width} x {self.depth} x {self.height}"
            )

    @property
    def center_xy(self) -> tuple[float, float]:
        return self.width / 2.0, self.depth / 2.0


def hexagon_side_for_area(area: float) -> float:
    return math.sqrt(2.0 * area / (3.0 * SQRT3))


def full_density_pitch(cell_area: float) -> float:
    """Centre spacing of regular hexagons of ``cell_area`` that tile the plane."""
    return SQRT3 * hexagon_side_for_area(cell_area)


@dataclass(frozen=True)
class HexGrid:
    """Hexagonal cells addressed by axial ``(q, r)``.

    Cell centre: ``origin + pitch * (q + r/2, r * sqrt(3)/2)``. Only cells whose
    centre lies on the closed foam footprint belong to the grid.
    """

    cell_area: float
    pitch: float
    origin: tuple[float, float]
    foam: FoamBlock
    infill_ratio: float = 1.0
    orientation: str = "pointy-top"

    @property
    def side(self) -> float:
        """Side length of the drawn (injected) hexagon."""
        return hexagon_side_for_area(self.cell_area)

    @property
    def density(self) -> float:
        """Fraction of the footprint covered by injected hexagons."""
        return self.cell_area / (self.pitch**2 * SQRT3 / 2.0)

    def center(self, q: int, r: int) -> tuple[float, float]:
        x = self.origin[0] + self.pitch * (q + 0.5 * r)
        y = self.origin[1] + self.pitch * (SQRT3 / 2.0) * r
        return x, y

    def centers(self, cells) -> np.ndarray:
        qr = np.asarray(cells, dtype=np.float64).reshape(-1, 2)
        x = self.origin[0] + self.pitch * (qr[:, 0] + 0.5 * qr[:, 1])
        y = self.origin[1] + self.pitch * (SQRT3 / 2.0) * qr[:, 1]
        return np.column_stack([x, y])

    def contains(self, q: int, r: int) -> bool:
        x, y = self.center(q, r)
        eps = 1e-9
        return -eps <= x <= self.foam.width + eps and -eps <= y <= self.foam.depth + eps

    @cached_property
    def cells(self) -> tuple[tuple[int, int], ...]:
        """All cells of the footprint, sorted by ``(q, r)``."""
        row = self.pitch * SQRT3 / 2.0
        ox, oy = self.origin
        r_lo = math.floor(-oy / row) - 1
        r_hi = math.ceil((self.foam.depth - oy) / row) + 1
        out = []
        for r in range(r_lo, r_hi + 1):
            q_lo = math.floor(-ox / self.pitch - 0.5 * r) - 1
            q_hi = math.ceil((self.foam.width - ox) / self.pitch - 0.5 * r) + 1
            for q in range(q_lo, q_hi + 1):
                if self.contains(q, r):
                    out.append((q, r))
        return tuple(sorted(out))

    def neighbors(self, q: int, r: int) -> list[tuple[int, int]]:
        return [(q + dq, r + dr) for dq, dr in HEX_DIRECTIONS]

    def hexagon(self, q: int, r: int) -> list[tuple[float, float]]:
        """Corners of the injected hexagon of area ``cell_area`` (pointy-top)."""
        cx, cy = self.center(q, r)
        a = self.side
        return [
            (cx + a * math.cos(math.radians(90 + 60 * k)), cy + a * math.sin(math.radians(90 + 60 * k)))
            for k in range(6)
        ]


def build_grid(foam: FoamBlock, cell_area: float, infill_ratio: float = 1.0) -> HexGrid:
    """Lattice of ``cell_area`` hexagons spread so injected area density is ``infill_ratio``.

    One cell centre sits on the footprint centre.
    """
    if not cell_area > 0:
        raise GeometryError(f"cell area must be positive, got {cell_area}")
    if not 0 < infill_ratio <= 1:
        raise GeometryError(f"infill ratio must be in (0, 1], got {infill_ratio}")
    if cell_area > foam.width * foam.depth:
        raise GeometryError(
            f"cell area {cell_area} mm^2 exceeds the foam footprint "
            f"{foam.width * foam.depth} mm^2"
        )
    pitch = full_density_pitch(cell_area) / math.sqrt(infill_ratio)
    return HexGrid(
        cell_area=cell_area,
        pitch=pitch,
        origin=foam.center_xy,
        foam=foam,
        infill_ratio=infill_ratio,
    )
