"""``foamfab`` command line: slice, mark, preview, analyze, calibrate-check.

Exit codes: 0 success, 1 internal error, 2 user or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from . import material
from .calib import hex_side, hexagon_area, load_calibration
from .config import load_config
from .errors import ConfigError, FoamfabError

log = logging.getLogger("foamfab")


def _styled(text: str, code: str, stream) -> str:
    if os.environ.get("FOAMFAB_NO_COLOR") or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\033[{code}m{text}\033[0m"


def _job(args):
    from .pipeline import plan_job

    if not args.config:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    job = plan_job(cfg)
    out = Path(args.out) if args.out else cfg.output_dir
    return job, out


def cmd_slice(args) -> int:
    from .pipeline import write_slice

    job, out = _job(args)
    paths = write_slice(job, out)
    log.info("wrote %d files to %s", len(paths), out)
    rep = job.report
    print(
        f"{len(job.files)} injection file(s), {rep.columns} columns, "
        f"{rep.volume:.3f} mm^3 -> {out}"
    )
    return 0


def cmd_mark(args) -> int:
    from .pipeline import marking_text, write_atomic

    job, out = _job(args)
    write_atomic(out / "mark.gcode", marking_text(job))
    print(f"{len(job.contours)} contour(s) -> {out / 'mark.gcode'}")
    return 0


def cmd_preview(args) -> int:
    from .pipeline import preview_svg, write_atomic

    job, out = _job(args)
    path = out / "preview.svg"
    write_atomic(path, preview_svg(job))
    print(f"{sum(len(f.columns) for f in job.files)} cells, {len(job.files)} file(s) -> {path}")
    return 0


def cmd_calibrate_check(args) -> int:
    path = args.calibration
    speed = args.speed
    if path is None:
        if not args.config:
            raise ConfigError("give --calibration or --config")
        cfg = load_config(args.config)
        path, speed = cfg.calibration, speed or cfg.inject_speed
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"calibration file not found: {path}")
    table = load_calibration(path)
    print(f"calibration ok: {path}")
    for h in table.ratios:
        lo, hi = table.speed_range(h)
        print(f"hydration {h:g}: S {lo:g}..{hi:g} mm/min")
        for s, q in table.curves[h]:
            a = hexagon_area(q, s)
            print(f"  S {s:g}  Q {q:g}  A {a:.4f} mm^2  side {hex_side(a):.4f} mm")
    if speed is not None:
        from .calib import cell_area_for

        for h in table.ratios:
            a = cell_area_for(table, speed, h)
            print(f"at S={speed:g}: hydration {h:g} -> A {a:.4f} mm^2, side {hex_side(a):.4f} mm")
    return 0


def cmd_analyze(args) -> int:
    sub = args.analysis
    if sub == "mix":
        water = material.mixing_masses(args.spa_grams, args.ratio)
        print(f"water: {water:g} g")
    elif sub == "swell":
        print(f"swelled volume: {material.swelled_volume(args.dry_volume):g} mm^3")
    elif sub == "drying":
        est = material.drying_time(args.volume, args.method)
        qual = "at least " if est.lower_bound else ""
        print(f"drying time: {qual}{est.hours:g} h ({est.method.value}, estimate)")
    elif sub == "joint":
        theta = material.max_bend_angle(args.l, args.t)
        print(f"theta: {theta:.6g} rad ({math.degrees(theta):.6g} deg)")
    elif sub == "stiffness":
        table = material.parse_stiffness(Path(args.table).read_text())
        d = material.stiffness_rank(table, args.ratio, args.load)
        print(f"deformation: {d:.6g} mm")
    elif sub == "bends":
        series = material.parse_resistance(Path(args.csv).read_text())
        events = material.detect_bend_events(series, args.threshold, args.window)
        print(f"events: {len(events)}")
        for e in events:
            print(
                f"  t={series.t[e.start]:g} s  drop {100 * e.magnitude:.2f}% "
                f"({e.baseline:.2f} -> {e.minimum:.2f} kOhm)"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="job configuration (TOML)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--verbose", "-v", action="store_true")

    p = argparse.ArgumentParser(prog="foamfab", description="Hydrogel injection toolpaths for foam blocks.")
    sp = p.add_subparsers(dest="command", required=True)
    sp.add_parser("slice", parents=[common], help="write injection G-code, mark.gcode and report.txt").set_defaults(func=cmd_slice)
    sp.add_parser("mark", parents=[common], help="write mark.gcode only").set_defaults(func=cmd_mark)
    sp.add_parser("preview", parents=[common], help="write preview.svg").set_defaults(func=cmd_preview)

    cc = sp.add_parser("calibrate-check", parents=[common], help="validate a calibration file")
    cc.add_argument("--calibration", help="calibration CSV (default: from --config)")
    cc.add_argument("--speed", type=float, help="report hexagon sizes at this speed (mm/min)")
    cc.set_defaults(func=cmd_calibrate_check)

    an = sp.add_parser("analyze", parents=[common], help="material calculations")
    asp = an.add_subparsers(dest="analysis", required=True)
    a = asp.add_parser("mix", help="water mass for a hydration ratio")
    a.add_argument("--spa-grams", type=float, required=True)
    a.add_argument("--ratio", type=float, required=True)
    a = asp.add_parser("swell", help="hydrated volume of dry SPA")
    a.add_argument("--dry-volume", type=float, required=True, help="mm^3")
    a = asp.add_parser("drying", help="drying time estimate")
    a.add_argument("--volume", type=float, required=True, help="mm^3")
    a.add_argument("--method", choices=[m.value for m in material.DryingMethod], default="room_air")
    a = asp.add_parser("joint", help="maximum bend angle of a hinge")
    a.add_argument("--l", type=float, required=True, help="dehydrated gap length, mm")
    a.add_argument("--t", type=float, required=True, help="hydrated wall thickness, mm")
    a = asp.add_parser("stiffness", help="deformation at a hydration ratio")
    a.add_argument("--table", required=True)
    a.add_argument("--ratio", type=float, required=True)
    a.add_argument("--load", type=float, help="grams; required for deformation-load curves")
    a = asp.add_parser("bends", help="count bend events in a resistance log")
    a.add_argument("--csv", required=True)
    a.add_argument("--threshold", type=float, default=0.05)
    a.add_argument("--window", type=int, default=3)
    an.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (FoamfabError, OSError) as exc:
        msg = str(exc) if not isinstance(exc, OSError) else f"{exc.filename or ''}: {exc.strerror}"
        print(f"{_styled('error:', '31', sys.stderr)} {msg}".replace("\n", " "), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"{_styled('internal error:', '31', sys.stderr)} {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
