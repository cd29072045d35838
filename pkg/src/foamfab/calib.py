"""Injection-rate calibration and hexagon sizing.

The hexagon area served by one column is the volume dispensed per unit of
needle travel, ``A = Q / S``. ``Q`` is measured per hydration ratio over a
range of speeds and interpolated piecewise-linearly, never extrapolated.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import CalibrationError, DomainError, ExtrapolationError, TableLookupError

HEADER = ["hydration_ratio", "speed_mm_min", "rate_mm3_min"]
SQRT3 = math.sqrt(3.0)


def hexagon_area(Q: float, S: float) -> float:
    """Hexagon area (mm^2) for injection rate ``Q`` (mm^3/min) at speed ``S`` (mm/min)."""
    if not (Q > 0 and S > 0):
        raise DomainError(f"rate and speed must be positive, got Q={Q}, S={S}")
    return Q / S


def hex_side(A: float) -> float:
    """Side of the regular hexagon with area ``A``."""
    if not A > 0:
        raise DomainError(f"hexagon area must be positive, got {A}")
    return math.sqrt(2.0 * A / (3.0 * SQRT3))


def hex_area_from_side(a: float) -> float:
    if not a > 0:
        raise DomainError(f"hexagon side must be positive, got {a}")
    return 1.5 * SQRT3 * a * a


@dataclass(frozen=True)
class CalibrationTable:
    """Measured ``(hydration_ratio, speed, rate)`` rows, grouped per ratio."""

    curves: dict[float, tuple[tuple[float, float], ...]]

    @classmethod
    def from_rows(cls, rows) -> "CalibrationTable":
        curves: dict[float, list[tuple[float, float]]] = {}
        for h, s, q in rows:
            h, s, q = float(h), float(s), float(q)
            if not (math.isfinite(h) and math.isfinite(s) and math.isfinite(q)):
                raise CalibrationError("calibration values must be finite")
            if not 0 < h <= 1:
                raise CalibrationError(f"hydration ratio {h} outside (0, 1]")
            if not (s > 0 and q > 0):
                raise CalibrationError(f"speed and rate must be positive (ratio {h}, S={s}, Q={q})")
            curves.setdefault(h, []).append((s, q))
        if not curves:
            raise CalibrationError("calibration table is empty")
        table = cls({h: tuple(pts) for h, pts in sorted(curves.items())})
        table.validate()
        return table

    def validate(self) -> None:
        for h, pts in self.curves.items():
            speeds = [s for s, _ in pts]
            if any(b <= a for a, b in zip(speeds, speeds[1:])):
                raise CalibrationError(
                    f"speeds for hydration ratio {h} must be strictly increasing without duplicates"
                )
        ratios = sorted(self.curves)
        for lo, hi in zip(ratios, ratios[1:]):
            s_lo = max(self.speed_range(lo)[0], self.speed_range(hi)[0])
            s_hi = min(self.speed_range(lo)[1], self.speed_range(hi)[1])
            probe = sorted(
                {s for s, _ in self.curves[lo] + self.curves[hi] if s_lo <= s <= s_hi}
            )
            for s in probe:
                if rate_at(self, s, lo) > rate_at(self, s, hi) * (1 + 1e-12):
                    raise CalibrationError(
                        f"rate at S={s} is higher for hydration {lo} than for {hi}; "
                        "drier hydrogel must not inject faster"
                    )

    @property
    def ratios(self) -> list[float]:
        return list(self.curves)

    def speed_range(self, hydration_ratio: float) -> tuple[float, float]:
        pts = self._curve(hydration_ratio)
        return pts[0][0], pts[-1][0]

    def _curve(self, hydration_ratio: float):
        for h, pts in self.curves.items():
            if math.isclose(h, hydration_ratio, rel_tol=0, abs_tol=1e-9):
                return pts
        raise TableLookupError(
            f"hydration ratio {hydration_ratio} not in calibration table "
            f"(available: {', '.join(f'{h:g}' for h in self.curves)})"
        )

    def rows(self):
        for h, pts in self.curves.items():
            for s, q in pts:
                yield h, s, q


def rate_at(table: CalibrationTable, S: float, hydration_ratio: float) -> float:
    """Injection rate at speed ``S`` by linear interpolation between measured nodes."""
    pts = table._curve(hydration_ratio)
    speeds = [s for s, _ in pts]
    if not speeds[0] <= S <= speeds[-1]:
        raise ExtrapolationError(
            f"speed {S} mm/min outside calibrated range [{speeds[0]}, {speeds[-1]}] "
            f"for hydration ratio {hydration_ratio}"
        )
    k = bisect.bisect_left(speeds, S)
    if speeds[k] == S:
        return pts[k][1]
    (s0, q0), (s1, q1) = pts[k - 1], pts[k]
    w = (S - s0) / (s1 - s0)
    return q0 + w * (q1 - q0)


def cell_area_for(table: CalibrationTable, S: float, hydration_ratio: float) -> float:
    """Hexagon area produced by injecting at speed ``S`` with the given hydrogel."""
    return hexagon_area(rate_at(table, S, hydration_ratio), S)


def parse_calibration(text: str) -> CalibrationTable:
    """Parse the comma-separated calibration format; ``#`` lines are comments."""
    rows = []
    header_seen = False
    for n, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader(io.StringIO(stripped)))]
        if not header_seen:
            if fields != HEADER:
                raise CalibrationError(f"line {n}: expected header {','.join(HEADER)}")
            header_seen = True
            continue
        if len(fields) != 3:
            raise CalibrationError(f"line {n}: expected 3 fields, got {len(fields)}")
        try:
            h, sp, q = (float(f) for f in fields)
        except ValueError:
            raise CalibrationError(f"line {n}: malformed number") from None
        if not (math.isfinite(h) and 0 < h <= 1):
            raise CalibrationError(f"line {n}: hydration ratio {fields[0]} outside (0, 1]")
        if not (math.isfinite(sp) and math.isfinite(q) and sp > 0 and q > 0):
            raise CalibrationError(f"line {n}: speed and rate must be positive")
        rows.append((h, sp, q))
    if not header_seen:
        raise CalibrationError("calibration file has no header")
    return CalibrationTable.from_rows(rows)


def load_calibration(path) -> CalibrationTable:
    return parse_calibration(Path(path).read_text())


def synthetic_table_path() -> Path:
    """Path of the bundled SYNTHETIC example table (not measured data)."""
    return Path(__file__).parent / "data" / "calibration_synthetic.csv"
