"""Injection and marking G-code: emitter, parser and a checking simulator.

Dialect: ``G0 G1 G21 G90 M2 M3 M5`` with ``X Y Z F`` words, ``;`` comments,
absolute millimetres, one command per line. The dispense valve is driven
from the spindle signal, so ``M3`` opens it and ``M5`` closes it.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import EmissionError, GCodeParseError
from .plan import MachineParams, MotionSet

MOTION = ("G0", "G1")
KNOWN = {"G0", "G1", "G21", "G90", "M2", "M3", "M5"}
CAPACITY_KEY = "syringe_capacity_mm3"


def fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def fmt_feed(f: float) -> str:
    s = f"{f:.3f}".rstrip("0").rstrip(".")
    return s


def _header(title: str, meta: dict | None) -> list[str]:
    lines = [f"; foamfab {title}"]
    for k, v in (meta or {}).items():
        lines.append(f"; {k}: {v}")
    lines += ["G21", "G90"]
    return lines


def _check_bounds(x: float, y: float, z: float, mp: MachineParams, what: str) -> None:
    eps = 1e-6
    f = mp.foam
    if not (-eps <= x <= f.width + eps and -eps <= y <= f.depth + eps):
        raise EmissionError(
            f"{what}: XY ({x:.3f}, {y:.3f}) outside the foam footprint {f.width} x {f.depth}"
        )
    if not -eps <= z <= mp.safe_height + eps:
        raise EmissionError(f"{what}: Z {z:.3f} outside [0, {mp.safe_height}]")


def emit_injection(motion_sets, mp: MachineParams, cell_area: float, meta: dict | None = None) -> str:
    """G-code text for a sequence of motion sets."""
    speed = mp.require_inject_speed()
    safe = mp.safe_height
    travel = fmt_feed(mp.travel_feed)
    meta = dict(meta or {})
    meta.setdefault("columns", len(motion_sets))
    meta.setdefault("cell_area_mm2", f"{cell_area:.6f}")
    meta.setdefault("inject_speed_mm_min", fmt_feed(speed))
    lines = _header("injection program", meta)
    lines.append(f"G0 Z{fmt(safe)} F{travel}")
    for ms in motion_sets:
        x, y, _ = ms.approach
        q, r = ms.column.cell
        _check_bounds(x, y, ms.insert_z, mp, f"column ({q}, {r})")
        _check_bounds(x, y, ms.top, mp, f"column ({q}, {r})")
        lines.append(f"; column {q},{r} body {ms.column.body}")
        lines.append(f"G0 X{fmt(x)} Y{fmt(y)} Z{fmt(safe)} F{travel}")
        lines.append(f"G1 Z{fmt(ms.insert_z)} F{fmt_feed(mp.insert_feed)}")
        valve = False
        for st in ms.strokes:
            if st.dispense != valve:
                lines.append("M3" if st.dispense else "M5")
                valve = st.dispense
            lines.append(f"G1 Z{fmt(st.z_to)} F{fmt_feed(speed)}")
        if valve:
            lines.append("M5")
        lines.append(f"G0 Z{fmt(ms.retract_z)} F{travel}")
    lines.append("M2")
    return "\n".join(lines) + "\n"


def emit_marking(contours, mp: MachineParams, meta: dict | None = None, clip: float = 1.0) -> str:
    """Trace each closed contour on the foam top face.

    Points up to ``clip`` mm outside the footprint are pulled onto its edge;
    anything further out is refused.
    """
    safe = mp.safe_height
    top = mp.foam.height
    travel = fmt_feed(mp.travel_feed)
    meta = dict(meta or {})
    meta.setdefault("contours", len(contours))
    lines = _header("marking program", meta)
    lines.append(f"G0 Z{fmt(safe)} F{travel}")
    W, D = mp.foam.width, mp.foam.depth
    for n, c in enumerate(contours):
        pts = list(c.points)
        if len(pts) < 4 or pts[0] != pts[-1]:
            raise EmissionError(f"contour {n} is not closed")
        clipped = []
        for x, y in pts:
            if x < -clip or y < -clip or x > W + clip or y > D + clip:
                raise EmissionError(f"contour {n}: point ({x:.3f}, {y:.3f}) outside the foam")
            clipped.append((min(max(x, 0.0), W), min(max(y, 0.0), D)))
        lines.append(f"; contour {n}{' hole' if c.hole else ''}")
        x0, y0 = clipped[0]
        lines.append(f"G0 X{fmt(x0)} Y{fmt(y0)} Z{fmt(safe)} F{travel}")
        lines.append(f"G1 Z{fmt(top)} F{fmt_feed(mp.insert_feed)}")
        mark = fmt_feed(mp.mark_feed)
        prev = (fmt(x0), fmt(y0))
        for x, y in clipped[1:]:
            cur = (fmt(x), fmt(y))
            if cur == prev:
                continue
            lines.append(f"G1 X{cur[0]} Y{cur[1]} F{mark}")
            prev = cur
        lines.append(f"G0 Z{fmt(safe)} F{travel}")
    lines.append("M2")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parsing


@dataclass(frozen=True)
class Command:
    """One parsed line. ``x``/``y``/``z``/``feed`` are the modal values in
    effect after the line (``None`` while still unknown); ``words`` keeps
    what was literally written."""

    kind: str
    line: int
    x: float | None = None
    y: float | None = None
    z: float | None = None
    feed: float | None = None
    words: dict = field(default_factory=dict)
    comment: str = ""

    @property
    def target(self) -> tuple[float | None, float | None, float | None]:
        return self.x, self.y, self.z


_WORD = re.compile(r"([A-Za-z])([-+]?(?:\d+\.?\d*|\.\d+))?")


def parse(text: str) -> list[Command]:
    commands: list[Command] = []
    x = y = z = feed = None
    for n, raw in enumerate(text.splitlines(), start=1):
        code, _, comment = raw.partition(";")
        code = code.strip()
        comment = comment.strip()
        if not code:
            if _ or comment:
                commands.append(Command("comment", n, x, y, z, feed, comment=comment))
            continue
        words: list[tuple[str, float]] = []
        for tok in code.split():
            pos = 0
            while pos < len(tok):
                m = _WORD.match(tok, pos)
                if m is None:
                    raise GCodeParseError(f"unexpected character {tok[pos]!r}", n)
                letter, number = m.group(1), m.group(2)
                if not letter.isupper() or letter not in "GMXYZF":
                    raise GCodeParseError(f"unknown word {m.group(0)!r}", n)
                if number is None:
                    raise GCodeParseError(f"malformed number after {letter!r}", n)
                value = float(number)
                if not math.isfinite(value):
                    raise GCodeParseError(f"non-finite number {number!r}", n)
                words.append((letter, value))
                pos = m.end()
        letter, value = words[0]
        if letter not in "GM":
            raise GCodeParseError("line must start with a G or M word", n)
        if value != int(value):
            raise GCodeParseError(f"unknown word {letter}{value:g}", n)
        kind = f"{letter}{int(value)}"
        if kind not in KNOWN:
            raise GCodeParseError(f"unsupported command {kind}", n)
        params: dict[str, float] = {}
        for letter, value in words[1:]:
            if letter in "GM":
                raise GCodeParseError("one command per line", n)
            if letter in params:
                raise GCodeParseError(f"repeated word {letter}", n)
            params[letter] = value
        if params and kind not in MOTION:
            raise GCodeParseError(f"{kind} takes no parameters", n)
        if kind in MOTION:
            if "F" in params:
                if params["F"] <= 0:
                    raise GCodeParseError("feed must be positive", n)
                feed = params["F"]
            if kind == "G1" and feed is None:
                raise GCodeParseError("G1 without a feed rate", n)
            x = params.get("X", x)
            y = params.get("Y", y)
            z = params.get("Z", z)
        commands.append(Command(kind, n, x, y, z, feed, params, comment))
    return commands


def declared_capacity(commands) -> float | None:
    for c in commands:
        if c.kind == "comment" and c.comment.startswith(CAPACITY_KEY + ":"):
            try:
                return float(c.comment.split(":", 1)[1])
            except ValueError:
                return None
    return None


# --------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class TraceState:
    line: int
    position: tuple[float, float, float]
    feed: float | None
    dispensing: bool
    volume: float


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass
class SimulationResult:
    trace: list[TraceState]
    diagnostics: list[Diagnostic]

    @property
    def volume(self) -> float:
        return self.trace[-1].volume if self.trace else 0.0

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def report(self) -> str:
        if not self.diagnostics:
            return "no diagnostics\n"
        return "\n".join(str(d) for d in self.diagnostics) + "\n"


def simulate(
    commands,
    mp: MachineParams,
    inject_speed: float | None = None,
    cell_area: float = 0.0,
    capacity: float | None = None,
) -> SimulationResult:
    """Replay commands from ``(0, 0, safe height)`` and flag rule violations.

    ``capacity`` defaults to a ``; syringe_capacity_mm3: ...`` header comment.
    """
    speed = inject_speed if inject_speed is not None else mp.inject_speed
    allowed = {mp.travel_feed, mp.insert_feed, mp.mark_feed}
    if speed is not None:
        allowed.add(speed)
    if capacity is None:
        capacity = declared_capacity(commands)
    safe = mp.safe_height
    top = mp.foam.height
    eps = 1e-9
    pos = (0.0, 0.0, safe)
    dispensing = False
    volume = 0.0
    ended = False
    trace: list[TraceState] = []
    diags: list[Diagnostic] = []

    def flag(n: int, msg: str) -> None:
        diags.append(Diagnostic(n, msg))

    for c in commands:
        if c.kind == "comment":
            continue
        n = c.line
        if ended:
            flag(n, "command after M2")
        if c.kind in MOTION:
            new = (
                c.words.get("X", pos[0]),
                c.words.get("Y", pos[1]),
                c.words.get("Z", pos[2]),
            )
            feed = c.feed
            if feed is not None and not any(abs(feed - a) <= 1e-9 for a in allowed):
                flag(n, f"feed F{fmt_feed(feed)} is not one of the configured feeds")
            dx, dy, dz = new[0] - pos[0], new[1] - pos[1], new[2] - pos[2]
            horizontal = abs(dx) > eps or abs(dy) > eps
            low = min(pos[2], new[2])
            if horizontal:
                if dispensing:
                    flag(n, "dispense during horizontal move")
                if low < top - eps:
                    flag(n, f"horizontal move inside the foam at z={fmt(low)}")
                elif low < safe - eps:
                    marking = c.kind == "G1" and feed is not None and abs(feed - mp.mark_feed) <= 1e-9
                    if not marking:
                        flag(n, f"horizontal move below safe height {fmt(safe)} at z={fmt(low)}")
            if dispensing and c.kind == "G0":
                flag(n, "dispense during rapid move")
            if dispensing and dz < -eps:
                flag(n, "dispense during descent")
            if dispensing and c.kind == "G1" and dz > eps:
                if speed is not None and feed is not None and abs(feed - speed) > 1e-9:
                    flag(n, f"dispensing ascent at F{fmt_feed(feed)} instead of the injection speed")
                volume += cell_area * dz
            pos = new
            trace.append(TraceState(n, pos, feed, dispensing, volume))
            continue
        if c.kind == "M3":
            dispensing = True
        elif c.kind == "M5":
            dispensing = False
        elif c.kind == "M2":
            if dispensing:
                flag(n, "program ends with the dispense valve open")
                dispensing = False
            ended = True
        trace.append(TraceState(n, pos, c.feed, dispensing, volume))
    if trace and not ended:
        flag(trace[-1].line, "program does not end with M2")
    if capacity is not None and volume > capacity * (1 + 1e-9):
        line = trace[-1].line if trace else 0
        flag(line, f"dispensed volume {volume:.3f} mm^3 exceeds syringe capacity {capacity:.3f} mm^3")
    return SimulationResult(trace, diags)


def motion_targets(motion_sets, mp: MachineParams):
    """Absolute targets and feeds the emitter writes, for round-trip checks."""
    speed = mp.require_inject_speed()
    safe = mp.safe_height
    out = [((None, None, safe), mp.travel_feed)]
    for ms in motion_sets:
        x, y, _ = ms.approach
        out.append(((x, y, safe), mp.travel_feed))
        out.append(((x, y, ms.insert_z), mp.insert_feed))
        for st in ms.strokes:
            out.append(((x, y, st.z_to), speed))
        out.append(((x, y, ms.retract_z), mp.travel_feed))
    return out
