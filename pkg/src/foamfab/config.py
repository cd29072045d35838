"""Job configuration (TOML, ``version = 1``).

Example::

    version = 1
    calibration = "calibration.csv"   # relative to this file
    inject_speed = 100                # mm/min
    syringe_capacity = 10000          # mm^3
    output_dir = "out"

    [foam]
    width = 60
    depth = 60
    height = 50

    [machine]                         # optional overrides
    safe_margin = 5
    travel_feed = 5000
    insert_feed = 500
    mark_feed = 1000

    [[body]]
    mesh = "box.stl"                  # millimetres
    infill_ratio = 1.0
    hydration_ratio = 0.5
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError

SCHEMA_VERSION = 1
_TOP_KEYS = {
    "version", "calibration", "inject_speed", "syringe_capacity", "output_dir",
    "z_step", "silhouette_resolution", "group_by_body", "foam", "machine", "body",
}
_MACHINE_KEYS = {"safe_margin", "travel_feed", "insert_feed", "mark_feed"}
_BODY_KEYS = {"mesh", "infill_ratio", "hydration_ratio", "name"}


@dataclass(frozen=True)
class BodyConfig:
    mesh: Path
    infill_ratio: float = 1.0
    hydration_ratio: float = 0.5
    name: str = ""


@dataclass(frozen=True)
class JobConfig:
    foam: tuple[float, float, float]
    bodies: tuple[BodyConfig, ...]
    calibration: Path
    inject_speed: float
    syringe_capacity: float
    machine: dict = field(default_factory=dict)
    output_dir: Path = Path("out")
    z_step: float = 0.5
    silhouette_resolution: float = 0.25
    group_by_body: bool = False


def _num(table: dict, key: str, where: str, default=None, positive: bool = True) -> float:
    if key not in table:
        if default is None:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: {key} must be a number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}: {key} must be positive, got {v}")
    return float(v)


def _unknown(table: dict, allowed: set, where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(extra)}")


def parse_config(text: str, base_dir: Path = Path(".")) -> JobConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    _unknown(raw, _TOP_KEYS, "config")
    version = raw.get("version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config version must be {SCHEMA_VERSION}, got {version!r}")
    foam = raw.get("foam")
    if not isinstance(foam, dict):
        raise ConfigError("config: missing [foam] table")
    _unknown(foam, {"width", "depth", "height"}, "[foam]")
    dims = tuple(_num(foam, k, "[foam]") for k in ("width", "depth", "height"))
    machine = raw.get("machine", {})
    if not isinstance(machine, dict):
        raise ConfigError("config: [machine] must be a table")
    _unknown(machine, _MACHINE_KEYS, "[machine]")
    machine = {k: _num(machine, k, "[machine]") for k in machine}
    bodies_raw = raw.get("body", [])
    if not isinstance(bodies_raw, list):
        raise ConfigError("config: bodies must be given as [[body]] blocks")
    bodies = []
    for i, b in enumerate(bodies_raw):
        where = f"[[body]] #{i + 1}"
        _unknown(b, _BODY_KEYS, where)
        if "mesh" not in b or not isinstance(b["mesh"], str):
            raise ConfigError(f"{where}: missing mesh path")
        bodies.append(
            BodyConfig(
                mesh=base_dir / b["mesh"],
                infill_ratio=_num(b, "infill_ratio", where, 1.0),
                hydration_ratio=_num(b, "hydration_ratio", where, 0.5),
                name=str(b.get("name", Path(b["mesh"]).stem)),
            )
        )
    if "calibration" not in raw or not isinstance(raw["calibration"], str):
        raise ConfigError("config: missing calibration file path")
    group = raw.get("group_by_body", False)
    if not isinstance(group, bool):
        raise ConfigError("config: group_by_body must be true or false")
    return JobConfig(
        foam=dims,
        bodies=tuple(bodies),
        calibration=base_dir / raw["calibration"],
        inject_speed=_num(raw, "inject_speed", "config"),
        syringe_capacity=_num(raw, "syringe_capacity", "config"),
        machine=machine,
        output_dir=base_dir / raw.get("output_dir", "out"),
        z_step=_num(raw, "z_step", "config", 0.5),
        silhouette_resolution=_num(raw, "silhouette_resolution", "config", 0.25),
        group_by_body=group,
    )


def load_config(path) -> JobConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path.parent)
