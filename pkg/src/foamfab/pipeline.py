"""End-to-end slicing: config -> columns -> order -> files -> G-code."""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .calib import cell_area_for, load_calibration
from .config import JobConfig
from .errors import CalibrationError, ConfigError, MeshParseError, MeshValidationError
from .gcode import CAPACITY_KEY, emit_injection, emit_marking
from .geometry import (
    BodySpec,
    Column,
    FoamBlock,
    HexGrid,
    build_grid,
    check_overlaps,
    load_mesh,
    project_silhouette,
    rasterize,
)
from .geometry.silhouette import Contour
from .plan import (
    JobReport,
    MachineParams,
    PrintFile,
    divide_jobs,
    estimate_job,
    order_columns,
    write_manifest,
)
from .preview import render_preview


@dataclass
class Job:
    config: JobConfig
    machine: MachineParams
    bodies: list[BodySpec]
    grids: list[HexGrid]  # per body
    columns: list[list[Column]]  # per body, axial order
    files: list[PrintFile]
    contours: list[Contour]
    report: JobReport

    @property
    def file_names(self) -> list[str]:
        return [f"inject_{i:03d}.gcode" for i in range(1, len(self.files) + 1)]

    def grid_of(self, column: Column) -> HexGrid:
        return self.grids[column.body]


def machine_params(cfg: JobConfig) -> MachineParams:
    return MachineParams(foam=FoamBlock(*cfg.foam), inject_speed=cfg.inject_speed, **cfg.machine)


def load_bodies(cfg: JobConfig) -> list[BodySpec]:
    bodies = []
    for b in cfg.bodies:
        if not b.mesh.is_file():
            raise ConfigError(f"mesh file not found: {b.mesh}")
        try:
            mesh = load_mesh(b.mesh)
        except (MeshParseError, MeshValidationError) as exc:
            raise ConfigError(f"{b.mesh}: {exc}") from None
        bodies.append(BodySpec(mesh, b.infill_ratio, b.hydration_ratio, b.name))
    return bodies


def plan_job(cfg: JobConfig) -> Job:
    """Rasterise, order and divide every body of the job.

    Bodies are batched by hydration ratio (one hydrogel per syringe fill),
    batches in order of first appearance. Inside a batch, bodies sharing a
    grid are flood-filled together; with ``group_by_body`` each body is
    ordered and divided on its own.
    """
    if not cfg.calibration.is_file():
        raise ConfigError(f"calibration file not found: {cfg.calibration}")
    table = load_calibration(cfg.calibration)
    mp = machine_params(cfg)
    bodies = load_bodies(cfg)
    grids, per_body = [], []
    for i, body in enumerate(bodies):
        try:
            area = cell_area_for(table, cfg.inject_speed, body.hydration_ratio)
        except CalibrationError as exc:
            raise CalibrationError(f"body {body.name!r}: {exc}") from None
        grid = build_grid(mp.foam, area, body.infill_ratio)
        grids.append(grid)
        per_body.append(rasterize(body, grid, cfg.z_step, body_index=i))
    check_overlaps(bodies, per_body)

    batches: dict[float, list[int]] = {}
    for i, body in enumerate(bodies):
        batches.setdefault(body.hydration_ratio, []).append(i)
    files: list[PrintFile] = []
    for hydration, members in batches.items():
        if cfg.group_by_body:
            units = [[i] for i in members]
        else:
            by_grid: dict[tuple, list[int]] = {}
            for i in members:
                by_grid.setdefault((grids[i].cell_area, grids[i].pitch), []).append(i)
            units = [list(v) for v in by_grid.values()]
        area = grids[members[0]].cell_area
        batch_order: list[Column] = []
        unit_orders = []
        for unit in units:
            cols = [c for i in unit for c in per_body[i]]
            unit_orders.append(order_columns(cols, grids[unit[0]]))
        if cfg.group_by_body:
            for order in unit_orders:
                files += divide_jobs(order, area, cfg.syringe_capacity, hydration)
        else:
            for order in unit_orders:
                batch_order += order
            files += divide_jobs(batch_order, area, cfg.syringe_capacity, hydration)

    contours = []
    for body in bodies:
        contours += project_silhouette(body, cfg.silhouette_resolution)
    return Job(cfg, mp, bodies, grids, per_body, files, contours, estimate_job(files, mp))


def injection_texts(job: Job) -> list[str]:
    out = []
    n = len(job.files)
    for k, pf in enumerate(job.files, start=1):
        meta = {
            "file": f"{k} of {n}",
            "volume_mm3": f"{pf.volume:.3f}",
            "hydration_ratio": f"{pf.hydration_ratio:g}" if pf.hydration_ratio is not None else "",
            CAPACITY_KEY: f"{job.config.syringe_capacity:.3f}",
        }
        out.append(emit_injection(pf.motion_sets(job.machine), job.machine, pf.cell_area, meta))
    return out


def marking_text(job: Job) -> str:
    return emit_marking(job.contours, job.machine)


def preview_svg(job: Job) -> str:
    owner = {}
    for f, pf in enumerate(job.files):
        for c in pf.columns:
            owner[id(c)] = f
    cells = [(c, job.grid_of(c), owner[id(c)]) for pf in job.files for c in pf.columns]
    return render_preview(job.machine.foam, cells, job.contours)


def report_text(job: Job) -> str:
    cfg, mp, rep = job.config, job.machine, job.report
    lines = [
        "foamfab job report",
        "==================",
        "",
        f"foam: {mp.foam.width:g} x {mp.foam.depth:g} x {mp.foam.height:g} mm",
        f"injection speed S: {cfg.inject_speed:g} mm/min",
        f"syringe capacity: {cfg.syringe_capacity:.3f} mm^3",
        f"safe height: {mp.safe_height:.3f} mm; feeds travel {mp.travel_feed:g}, "
        f"insert {mp.insert_feed:g}, mark {mp.mark_feed:g} mm/min",
        "",
        "Bodies",
        "------",
    ]
    for i, (b, g) in enumerate(zip(job.bodies, job.grids)):
        lines.append(
            f"{i}: {b.name} infill {b.infill_ratio:g} hydration {b.hydration_ratio:g} "
            f"hexagon area {g.cell_area:.4f} mm^2 pitch {g.pitch:.4f} mm "
            f"columns {len(job.columns[i])}"
        )
    lines += ["", "Files", "-----"]
    lines += write_manifest(job.files, job.file_names).rstrip("\n").splitlines()
    lines += ["", "Estimates", "---------"]
    for name, fr in zip(job.file_names, rep.files):
        spa = "" if fr.spa_mass is None else f", dry SPA {fr.spa_mass:.3f} g"
        lines.append(
            f"{name}: {fr.columns} columns, {fr.volume:.3f} mm^3, gel {fr.gel_mass:.3f} g{spa}, "
            f"{fr.duration_min:.2f} min (travel {fr.travel_min:.2f}, insert {fr.insert_min:.2f}, "
            f"inject {fr.inject_min:.2f}, retract {fr.retract_min:.2f})"
        )
    lines += [
        f"total: {rep.columns} columns, {rep.volume:.3f} mm^3, gel {rep.gel_mass:.3f} g, "
        f"{rep.duration_min:.2f} min",
        f"marking: {len(job.contours)} contour(s) in mark.gcode",
        "",
        "Operator checklist (suggested workflow, not a validated procedure)",
        "------------------------------------------------------------------",
        "[ ] tape the foam block to the bed; zero X/Y at its minimum corner, Z at its bottom",
        "[ ] run mark.gcode with the marking tool",
    ]
    for name, pf in zip(job.file_names, job.files):
        h = "" if pf.hydration_ratio is None else f" ({pf.hydration_ratio:g} hydration)"
        lines.append(f"[ ] fill the syringe with >= {pf.volume / 1000:.2f} mL hydrogel{h}; run {name}")
    lines += [
        "[ ] dry the part, then cut along the marked outlines with a hot wire",
        "",
    ]
    return "\n".join(lines)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_slice(job: Job, out_dir: Path) -> list[Path]:
    written = []
    for name, text in zip(job.file_names, injection_texts(job)):
        write_atomic(out_dir / name, text)
        written.append(out_dir / name)
    write_atomic(out_dir / "mark.gcode", marking_text(job))
    write_atomic(out_dir / "report.txt", report_text(job))
    return written + [out_dir / "mark.gcode", out_dir / "report.txt"]
