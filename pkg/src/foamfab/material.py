"""Hydrogel-foam material models built on measured constants.

Drying times, the joint bend angle and bend-event detection are models or
estimates; only the constants in :data:`CONSTANTS` are measurements.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DomainError, ExtrapolationError, FoamfabError


@dataclass(frozen=True)
class MaterialConstants:
    max_absorption: float = 212.0  # g water per g dry SPA
    swell_factor: float = 262.0  # hydrated / dry volume
    compressibility_dehydrated: float = 0.793
    compressibility_hydrated: float = 0.044
    air_dry_retention: float = 0.87  # fraction of hydrated weight kept after hot-air drying
    drying_ref_volume: float = 125000.0  # mm^3, 50 mm cube
    drying_ref_hours: float = 120.0  # room air
    hot_air_min_hours: float = 72.0  # lower bound at the reference volume
    salt_speedup_max: float = 50.0


CONSTANTS = MaterialConstants()


class State(str, Enum):
    DEHYDRATED = "dehydrated"
    HYDRATED = "hydrated"


class DryingMethod(str, Enum):
    ROOM_AIR = "room_air"
    HOT_AIR = "hot_air"
    SALT = "salt"


def mixing_masses(spa_mass: float, hydration_ratio: float, c: MaterialConstants = CONSTANTS) -> float:
    """Water (g) to mix with ``spa_mass`` g of dry SPA for the given hydration ratio."""
    if spa_mass < 0:
        raise DomainError(f"SPA mass must be non-negative, got {spa_mass}")
    if not 0 <= hydration_ratio <= 1:
        raise DomainError(f"hydration ratio must be in [0, 1], got {hydration_ratio}")
    return hydration_ratio * c.max_absorption * spa_mass


def swelled_volume(dry_volume: float, c: MaterialConstants = CONSTANTS) -> float:
    if dry_volume < 0:
        raise DomainError(f"dry volume must be non-negative, got {dry_volume}")
    return dry_volume * c.swell_factor


def compressibility_of(state, c: MaterialConstants = CONSTANTS) -> float:
    """Maximum volumetric compression fraction of an injected sample."""
    state = State(state)
    if state is State.DEHYDRATED:
        return c.compressibility_dehydrated
    return c.compressibility_hydrated


@dataclass(frozen=True)
class DryingEstimate:
    hours: float
    method: DryingMethod
    lower_bound: bool = False  # True when ``hours`` is a minimum, not a point estimate


def drying_time(volume: float, method="room_air", c: MaterialConstants = CONSTANTS) -> DryingEstimate:
    """Estimated dehydration time, scaled linearly from the 50 mm cube reference."""
    if not volume > 0:
        raise DomainError(f"volume must be positive, got {volume}")
    method = DryingMethod(method)
    scale = volume / c.drying_ref_volume
    if method is DryingMethod.ROOM_AIR:
        return DryingEstimate(c.drying_ref_hours * scale, method)
    if method is DryingMethod.HOT_AIR:
        return DryingEstimate(c.hot_air_min_hours * scale, method, lower_bound=True)
    return DryingEstimate(c.drying_ref_hours * scale / c.salt_speedup_max, method)


# --------------------------------------------------------------------------
# tables


class TableError(FoamfabError):
    pass


def _interp(xs, ys, x: float, what: str) -> float:
    if not xs[0] <= x <= xs[-1]:
        raise ExtrapolationError(f"{what} {x} outside tabulated range [{xs[0]}, {xs[-1]}]")
    k = bisect.bisect_left(xs, x)
    if xs[k] == x:
        return ys[k]
    w = (x - xs[k - 1]) / (xs[k] - xs[k - 1])
    return ys[k - 1] + w * (ys[k] - ys[k - 1])


@dataclass(frozen=True)
class StiffnessTable:
    """Deformation (mm) per hydration ratio, either at one reference load or
    as deformation-load curves.

    ``curves[ratio]`` is a tuple of ``(load_g, deformation_mm)``; a single-load
    table uses ``load_g = None``.
    """

    curves: dict[float, tuple[tuple[float | None, float], ...]]

    def __post_init__(self):
        if not self.curves:
            raise TableError("stiffness table is empty")
        for h, pts in self.curves.items():
            loads = [p[0] for p in pts]
            if None in loads:
                if len(pts) != 1:
                    raise TableError(f"ratio {h}: single-load rows must not repeat")
            elif any(b <= a for a, b in zip(loads, loads[1:])):
                raise TableError(f"ratio {h}: loads must be strictly increasing")
        kinds = {pts[0][0] is None for pts in self.curves.values()}
        if len(kinds) != 1:
            raise TableError("mix of single-load and curve rows")
        ratios = sorted(self.curves)
        for lo, hi in zip(ratios, ratios[1:]):
            for load in self._common_loads(lo, hi):
                if self.deformation(lo, load) > self.deformation(hi, load) + 1e-12:
                    raise TableError(
                        f"deformation must not decrease with hydration ratio ({lo} vs {hi})"
                    )

    @property
    def ratios(self) -> list[float]:
        return sorted(self.curves)

    @property
    def single_load(self) -> bool:
        return next(iter(self.curves.values()))[0][0] is None

    def _common_loads(self, a: float, b: float):
        if self.single_load:
            return [None]
        la = [p[0] for p in self.curves[a]]
        lb = [p[0] for p in self.curves[b]]
        lo, hi = max(la[0], lb[0]), min(la[-1], lb[-1])
        return sorted({x for x in la + lb if lo <= x <= hi})

    def deformation(self, ratio: float, load: float | None = None) -> float:
        pts = self.curves[ratio]
        if self.single_load:
            return pts[0][1]
        if load is None:
            raise TableError("load is required for deformation-load curves")
        return _interp([p[0] for p in pts], [p[1] for p in pts], load, "load")


def stiffness_rank(table: StiffnessTable, ratio: float, load: float | None = None) -> float:
    """Deformation at ``load`` for hydration ``ratio``; smaller means stiffer.

    Linear in the ratio between tabulated ratios; no extrapolation.
    """
    ratios = table.ratios
    values = [table.deformation(h, load) for h in ratios]
    return _interp(ratios, values, ratio, "hydration ratio")


def parse_stiffness(text: str) -> StiffnessTable:
    """``hydration_ratio,deformation_mm`` or ``hydration_ratio,load_g,deformation_mm``."""
    rows = _read_rows(text)
    header, body = rows[0], rows[1:]
    curves: dict[float, list] = {}
    if header == ["hydration_ratio", "deformation_mm"]:
        for n, r in body:
            h, d = _floats(r, 2, n)
            curves.setdefault(h, []).append((None, d))
    elif header == ["hydration_ratio", "load_g", "deformation_mm"]:
        for n, r in body:
            h, load, d = _floats(r, 3, n)
            curves.setdefault(h, []).append((load, d))
    else:
        raise TableError(f"unknown stiffness header {','.join(header)}")
    return StiffnessTable({h: tuple(p) for h, p in sorted(curves.items())})


@dataclass(frozen=True)
class RetentionTable:
    """Fraction of hydrated weight retained after each dry/rehydrate cycle."""

    cycles: tuple[int, ...]
    retention: tuple[float, ...]

    def __post_init__(self):
        if not self.cycles:
            raise TableError("retention table is empty")
        if any(b <= a for a, b in zip(self.cycles, self.cycles[1:])):
            raise TableError("cycles must be strictly increasing")
        if any(not 0 <= r <= 1 for r in self.retention):
            raise TableError("retention fractions must lie in [0, 1]")

    def at(self, cycle: float) -> float:
        return _interp(list(self.cycles), list(self.retention), cycle, "cycle")


def parse_retention(text: str) -> RetentionTable:
    rows = _read_rows(text)
    if rows[0] != ["cycle", "retention"]:
        raise TableError("retention header must be cycle,retention")
    cycles, values = [], []
    for n, r in rows[1:]:
        c, v = _floats(r, 2, n)
        cycles.append(int(c))
        values.append(v)
    return RetentionTable(tuple(cycles), tuple(values))


def _read_rows(text: str):
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader(io.StringIO(s)))]
        out.append(fields if not out else (n, fields))
    if not out:
        raise TableError("table has no header")
    return out


def _floats(fields, k: int, line: int):
    if len(fields) != k:
        raise TableError(f"line {line}: expected {k} fields, got {len(fields)}")
    try:
        vals = [float(f) for f in fields]
    except ValueError:
        raise TableError(f"line {line}: malformed number") from None
    if not all(math.isfinite(v) for v in vals):
        raise TableError(f"line {line}: non-finite value")
    return vals


# --------------------------------------------------------------------------
# joint geometry


def max_bend_angle(l: float, t: float) -> float:
    """Wedge-closure model of a printed hinge.

    A dehydrated gap of length ``l`` separates two hydrated walls of
    thickness ``t``; the hinge stops when the facing corners touch, at
    ``theta = 2 * atan(l / (2 t))``.
    """
    if not t > 0:
        raise DomainError(f"wall thickness must be positive, got {t}")
    if l < 0:
        raise DomainError(f"gap length must be non-negative, got {l}")
    return 2.0 * math.atan(l / (2.0 * t))


# --------------------------------------------------------------------------
# strain sensing


@dataclass(frozen=True)
class ResistanceSeries:
    t: np.ndarray  # s
    r: np.ndarray  # kOhm

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        r = np.asarray(self.r, dtype=np.float64)
        if t.shape != r.shape or t.ndim != 1:
            raise TableError("timestamps and resistances must be 1-D and equal length")
        if np.any(np.diff(t) <= 0):
            raise TableError("timestamps must be strictly increasing")
        if np.any(r <= 0) or not np.all(np.isfinite(r)):
            raise TableError("resistances must be positive and finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_values(cls, values, dt: float = 1.0) -> "ResistanceSeries":
        v = np.asarray(values, dtype=np.float64)
        return cls(np.arange(len(v)) * dt, v)

    def __len__(self) -> int:
        return len(self.r)


def parse_resistance(text: str) -> ResistanceSeries:
    rows = _read_rows(text)
    if rows[0] != ["timestamp_s", "resistance_kohm"]:
        raise TableError("resistance header must be timestamp_s,resistance_kohm")
    ts, rs = [], []
    for n, r in rows[1:]:
        t, v = _floats(r, 2, n)
        ts.append(t)
        rs.append(v)
    return ResistanceSeries(np.array(ts), np.array(rs))


@dataclass(frozen=True)
class BendEvent:
    start: int  # index of the sample that crossed the threshold
    magnitude: float  # deepest drop as a fraction of the baseline
    baseline: float  # kOhm
    minimum: float  # kOhm


def detect_bend_events(
    series: ResistanceSeries,
    drop_threshold: float = 0.05,
    window: int = 3,
    relaxation: float = 0.01,
    recovery: float = 0.5,
) -> list[BendEvent]:
    """Find sudden resistance drops.

    The baseline follows the running maximum and relaxes toward the signal by
    ``relaxation`` of the gap per sample, so slow drift is absorbed. An event
    starts when the signal sits ``drop_threshold`` (fraction of the baseline)
    below the highest of the last ``window`` samples. It ends once the signal
    is back within ``recovery * drop_threshold`` of the frozen baseline.
    """
    if not 0 < drop_threshold < 1:
        raise DomainError(f"drop threshold must be in (0, 1), got {drop_threshold}")
    if window < 2:
        raise DomainError(f"window must be at least 2 samples, got {window}")
    if len(series) < window:
        raise DomainError(f"series has {len(series)} samples, shorter than the window {window}")
    r = series.r
    events: list[BendEvent] = []
    baseline = float(r[0])
    active = None  # [start, baseline, minimum]
    for i in range(len(r)):
        v = float(r[i])
        if active is not None:
            active[2] = min(active[2], v)
            if (active[1] - v) / active[1] < recovery * drop_threshold:
                events.append(
                    BendEvent(active[0], (active[1] - active[2]) / active[1], active[1], active[2])
                )
                active = None
                baseline = v
            continue
        peak = float(r[max(0, i - window + 1): i + 1].max())
        if (peak - v) / baseline >= drop_threshold and v < baseline:
            active = [i, baseline, v]
            continue
        baseline = max(v, baseline - relaxation * (baseline - v))
    if active is not None:
        events.append(BendEvent(active[0], (active[1] - active[2]) / active[1], active[1], active[2]))
    return events


def fixture_path(name: str) -> Path:
    return Path(__file__).parent / "data" / name
