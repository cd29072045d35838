"""Injection ordering, per-column motion sets, syringe division and estimates."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .errors import ConfigError, InfeasibleDivisionError, PlanError
from .geometry.grid import HEX_DIRECTIONS, FoamBlock, HexGrid
from .geometry.raster import Column

# Hydrated hydrogel is mostly water; used to turn dispensed volume into mass.
GEL_DENSITY_G_PER_MM3 = 1e-3
MAX_ABSORPTION = 212.0  # g water per g dry SPA


@dataclass(frozen=True)
class MachineParams:
    foam: FoamBlock
    inject_speed: float | None = None
    safe_margin: float = 5.0
    travel_feed: float = 5000.0
    insert_feed: float = 500.0
    mark_feed: float = 1000.0

    def __post_init__(self):
        for name in ("safe_margin", "travel_feed", "insert_feed", "mark_feed"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.inject_speed is not None and not self.inject_speed > 0:
            raise ConfigError(f"inject_speed must be positive, got {self.inject_speed}")

    @property
    def safe_height(self) -> float:
        return round(self.foam.height + self.safe_margin, 3)

    def require_inject_speed(self) -> float:
        if self.inject_speed is None:
            raise ConfigError("inject_speed is not set")
        return self.inject_speed


@dataclass(frozen=True)
class Stroke:
    """Vertical ascent from ``z_from`` to ``z_to`` with the valve open or closed."""

    z_from: float
    z_to: float
    dispense: bool


@dataclass(frozen=True)
class MotionSet:
    """Approach at safe height, plunge to the deepest point, ascend, retract."""

    column: Column
    approach: tuple[float, float, float]
    insert_z: float
    strokes: tuple[Stroke, ...]
    retract_z: float

    @property
    def top(self) -> float:
        return self.strokes[-1].z_to


@dataclass(frozen=True)
class PrintFile:
    """Contiguous slice of the global order that fits one syringe."""

    columns: tuple[Column, ...]
    volume: float
    cell_area: float
    hydration_ratio: float | None = None

    @property
    def bodies(self) -> tuple[int, ...]:
        return tuple(sorted({c.body for c in self.columns}))

    def motion_sets(self, mp: MachineParams) -> list[MotionSet]:
        return build_motion_sets(self.columns, mp)


@dataclass(frozen=True)
class FileReport:
    columns: int
    volume: float
    gel_mass: float
    spa_mass: float | None
    travel_min: float
    insert_min: float
    inject_min: float
    retract_min: float

    @property
    def duration_min(self) -> float:
        return self.travel_min + self.insert_min + self.inject_min + self.retract_min


@dataclass(frozen=True)
class JobReport:
    files: tuple[FileReport, ...] = field(default_factory=tuple)

    @property
    def columns(self) -> int:
        return sum(f.columns for f in self.files)

    @property
    def volume(self) -> float:
        return sum(f.volume for f in self.files)

    @property
    def gel_mass(self) -> float:
        return sum(f.gel_mass for f in self.files)

    @property
    def duration_min(self) -> float:
        return sum(f.duration_min for f in self.files)


def _check_in_grid(columns, grid: HexGrid) -> None:
    for c in columns:
        x, y = grid.center(*c.cell)
        if abs(x - c.center[0]) > 1e-6 or abs(y - c.center[1]) > 1e-6:
            raise PlanError(f"column {c.cell} at {c.center} does not belong to the grid")


def order_columns(columns, grid: HexGrid) -> list[Column]:
    """Breadth-first flood fill from the column nearest the grid centre.

    Each connected component (6-neighbour adjacency; stacked columns in the
    same cell are adjacent too) is filled in turn, components ordered by
    their nearest-to-centre column. Ties break on axial coordinates.
    """
    columns = list(columns)
    if not columns:
        return []
    _check_in_grid(columns, grid)
    by_cell: dict[tuple[int, int], list[int]] = {}
    for i, c in enumerate(columns):
        by_cell.setdefault(c.cell, []).append(i)
    for idx in by_cell.values():
        idx.sort(key=lambda i: columns[i].body)
    ox, oy = grid.origin

    def key(i: int):
        c = columns[i]
        d = math.hypot(c.center[0] - ox, c.center[1] - oy)
        return (round(d, 9), c.cell, c.body)

    seeds = sorted(range(len(columns)), key=key)
    visited = [False] * len(columns)
    out: list[Column] = []
    for seed in seeds:
        if visited[seed]:
            continue
        visited[seed] = True
        queue = deque([seed])
        while queue:
            i = queue.popleft()
            out.append(columns[i])
            q, r = columns[i].cell
            for cell in [(q, r)] + [(q + dq, r + dr) for dq, dr in HEX_DIRECTIONS]:
                for j in by_cell.get(cell, ()):
                    if not visited[j]:
                        visited[j] = True
                        queue.append(j)
    return out


def build_motion_sets(ordered, mp: MachineParams) -> list[MotionSet]:
    mp.require_inject_speed()
    out = []
    safe = mp.safe_height
    for c in ordered:
        if not c.segments:
            raise PlanError(f"column {c.cell} has no segments")
        if c.bottom < -1e-9 or c.top > mp.foam.height + 1e-9:
            raise PlanError(
                f"column {c.cell} spans z {c.bottom:.3f}..{c.top:.3f}, outside the foam [0, {mp.foam.height}]"
            )
        strokes = []
        prev_hi = None
        for lo, hi in c.segments:
            if prev_hi is not None and lo > prev_hi:
                strokes.append(Stroke(prev_hi, lo, False))
            strokes.append(Stroke(lo, hi, True))
            prev_hi = hi
        out.append(
            MotionSet(
                column=c,
                approach=(round(c.center[0], 3), round(c.center[1], 3), safe),
                insert_z=c.bottom,
                strokes=tuple(strokes),
                retract_z=safe,
            )
        )
    return out


def divide_jobs(ordered, cell_area: float, capacity: float, hydration_ratio: float | None = None) -> list[PrintFile]:
    """Greedy contiguous split of the order so no file exceeds ``capacity`` mm^3."""
    if not capacity > 0:
        raise PlanError(f"syringe capacity must be positive, got {capacity}")
    files: list[PrintFile] = []
    current: list[Column] = []
    volume = 0.0
    limit = capacity * (1 + 1e-12)
    for c in ordered:
        v = c.volume(cell_area)
        if v > limit:
            raise InfeasibleDivisionError(
                f"column {c.cell} (body {c.body}) needs {v:.3f} mm^3, more than the "
                f"syringe capacity {capacity:.3f} mm^3",
                column=c,
            )
        if current and volume + v > limit:
            files.append(PrintFile(tuple(current), volume, cell_area, hydration_ratio))
            current, volume = [], 0.0
        current.append(c)
        volume += v
    if current:
        files.append(PrintFile(tuple(current), volume, cell_area, hydration_ratio))
    return files


def estimate_file(pf: PrintFile, mp: MachineParams) -> FileReport:
    """Time and material for one file; the machine starts at ``(0, 0)``."""
    speed = mp.require_inject_speed()
    safe = mp.safe_height
    x, y = 0.0, 0.0
    travel = insert = inject = retract = 0.0
    for c in pf.columns:
        travel += math.hypot(c.center[0] - x, c.center[1] - y) / mp.travel_feed
        insert += (safe - c.bottom) / mp.insert_feed
        inject += (c.top - c.bottom) / speed
        retract += (safe - c.top) / mp.travel_feed
        x, y = c.center
    gel = pf.volume * GEL_DENSITY_G_PER_MM3
    spa = None
    if pf.hydration_ratio is not None:
        spa = gel / (1.0 + MAX_ABSORPTION * pf.hydration_ratio)
    return FileReport(len(pf.columns), pf.volume, gel, spa, travel, insert, inject, retract)


def estimate_job(files, mp: MachineParams) -> JobReport:
    return JobReport(tuple(estimate_file(f, mp) for f in files))


MANIFEST_HEADER = "file,columns,volume_mm3,cell_area_mm2,hydration_ratio,bodies"


def write_manifest(files, names=None) -> str:
    """Plain-text plan manifest, one line per print file."""
    names = names or [f"inject_{i:03d}.gcode" for i in range(1, len(files) + 1)]
    lines = ["# foamfab plan manifest v1", MANIFEST_HEADER]
    for name, f in zip(names, files):
        h = "" if f.hydration_ratio is None else f"{f.hydration_ratio:g}"
        bodies = ";".join(str(b) for b in f.bodies)
        lines.append(f"{name},{len(f.columns)},{f.volume:.3f},{f.cell_area:.6f},{h},{bodies}")
    return "\n".join(lines) + "\n"


def read_manifest(text: str) -> list[dict]:
    """Parse a manifest, alone or embedded in a report (ends at a blank line)."""
    lines = text.splitlines()
    try:
        start = lines.index(MANIFEST_HEADER)
    except ValueError:
        raise PlanError("manifest: header not found") from None
    rows = []
    for n, ln in enumerate(lines[start + 1:], start=start + 2):
        if not ln.strip():
            break
        parts = ln.split(",")
        if len(parts) != 6:
            raise PlanError(f"manifest line {n}: expected 6 fields")
        try:
            rows.append(
                {
                    "file": parts[0],
                    "columns": int(parts[1]),
                    "volume_mm3": float(parts[2]),
                    "cell_area_mm2": float(parts[3]),
                    "hydration_ratio": float(parts[4]) if parts[4] else None,
                    "bodies": [int(b) for b in parts[5].split(";") if b],
                }
            )
        except ValueError:
            raise PlanError(f"manifest line {n}: malformed number") from None
    return rows
