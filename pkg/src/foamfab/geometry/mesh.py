"""Triangle meshes: STL ingestion, validation and a few primitive builders."""
from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field
from typing import BinaryIO

import numpy as np

from .. import kernels
from ..errors import MeshParseError, MeshValidationError

MERGE_TOL = 1e-6  # mm
MIN_AREA = 1e-9  # mm^2
PERTURB = 1e-7  # mm


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Closed triangle surface in millimetres.

    ``vertices`` is ``(V, 3)`` float64, ``triangles`` is ``(T, 3)`` int64.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    _tris: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise MeshValidationError("triangle references a vertex index out of range")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        tris = v[t] if t.size else np.zeros((0, 3, 3))
        tris.setflags(write=False)
        object.__setattr__(self, "_tris", tris)

    @property
    def triangle_coords(self) -> np.ndarray:
        """``(T, 3, 3)`` array of triangle corner coordinates."""
        return self._tris

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_empty:
            raise MeshValidationError("empty mesh has no bounds")
        used = self.vertices[np.unique(self.triangles)]
        return used.min(axis=0), used.max(axis=0)

    def volume(self) -> float:
        """Signed enclosed volume (positive for outward-facing triangles)."""
        if self.is_empty:
            return 0.0
        a, b, c = self._tris[:, 0], self._tris[:, 1], self._tris[:, 2]
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    def translated(self, offset) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(offset, dtype=np.float64), self.triangles)

    def boundary_edges(self) -> list[tuple[int, int]]:
        """Undirected edges not shared by exactly two triangles."""
        if self.is_empty:
            return []
        t = self.triangles
        edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        edges.sort(axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        return [tuple(int(i) for i in e) for e in uniq[counts != 2]]

    def validate(self) -> None:
        """Raise :class:`MeshValidationError` unless the mesh is a clean solid."""
        if self.is_empty:
            return
        t = self.triangles
        repeated = (t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])
        a, b, c = self._tris[:, 0], self._tris[:, 1], self._tris[:, 2]
        area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        bad = np.nonzero(repeated | (area <= MIN_AREA))[0]
        if bad.size:
            raise MeshValidationError(
                f"{bad.size} degenerate triangle(s), first at index {int(bad[0])}"
            )
        open_edges = self.boundary_edges()
        if open_edges:
            shown = ", ".join(
                f"({self.vertices[i].tolist()} - {self.vertices[j].tolist()})"
                for i, j in open_edges[:5]
            )
            more = "" if len(open_edges) <= 5 else f" and {len(open_edges) - 5} more"
            raise MeshValidationError(
                f"mesh is not watertight: {len(open_edges)} boundary edge(s): {shown}{more}",
                edges=open_edges,
            )


# --------------------------------------------------------------------------
# ray queries


def vertical_hits(mesh: TriangleMesh, xy: np.ndarray):
    """Sorted crossing heights of vertical lines through ``xy`` (``(N, 2)``).

    Returns a list of 1-D arrays plus the degenerate-line mask; lines that graze
    an edge are retried with a deterministic sideways nudge before being
    reported as degenerate.
    """
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    n = len(xy)
    hits: list[np.ndarray] = [np.zeros(0)] * n
    degenerate = np.zeros(n, dtype=bool)
    if mesh.is_empty or n == 0:
        return hits, degenerate
    todo = np.arange(n)
    # nudges are multiples of PERTURB in fixed, non-axis directions
    nudges = [(0.0, 0.0), (1.0, 0.618), (-0.618, 1.0), (-1.0, -0.618), (0.618, -1.0)]
    for dx, dy in nudges:
        if todo.size == 0:
            break
        px = xy[todo, 0] + dx * PERTURB
        py = xy[todo, 1] + dy * PERTURB
        offsets, zs, deg = kernels.vertical_crossings(mesh.triangle_coords, px, py)
        counts = np.diff(offsets)
        bad = deg | (counts % 2 == 1)
        for k in np.nonzero(~bad)[0]:
            hits[todo[k]] = zs[offsets[k]:offsets[k + 1]].copy()
        todo = todo[bad]
    degenerate[todo] = True
    return hits, degenerate


def points_in_solid(mesh: TriangleMesh, points) -> np.ndarray:
    """Vectorised :func:`point_in_solid`."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    out = np.zeros(len(pts), dtype=bool)
    if mesh.is_empty or len(pts) == 0:
        return out
    hits, degenerate = vertical_hits(mesh, pts[:, :2])
    for i, z in enumerate(hits):
        if degenerate[i]:
            out[i] = _parity_along_x(mesh, pts[i])
        else:
            out[i] = np.count_nonzero(z > pts[i, 2]) % 2 == 1
    return out


def point_in_solid(mesh: TriangleMesh, p) -> bool:
    """Ray-parity inside test along +z."""
    return bool(points_in_solid(mesh, [p])[0])


def _parity_along_x(mesh: TriangleMesh, p) -> bool:
    # rare fallback: cast along +x instead by swapping axes
    swapped = mesh.triangle_coords[:, :, [1, 2, 0]]
    offsets, zs, _ = kernels.vertical_crossings(
        swapped, np.array([p[1] + 0.37 * PERTURB]), np.array([p[2] + 0.71 * PERTURB])
    )
    return np.count_nonzero(zs > p[0]) % 2 == 1


# --------------------------------------------------------------------------
# STL input / output


def load_mesh(source, format: str | None = None) -> TriangleMesh:
    """Read an STL from bytes, a binary stream or a path.

    ``format`` is ``"stl-binary"``, ``"stl-ascii"`` or ``None`` to sniff.
    Coincident vertices are merged and the result is validated as watertight.
    """
    if isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    if format is None:
        format = "stl-binary" if _looks_binary(data) else "stl-ascii"
    if format == "stl-binary":
        tris = _parse_binary(data)
    elif format == "stl-ascii":
        tris = _parse_ascii(data)
    else:
        raise ValueError(f"unknown mesh format {format!r}")
    mesh = mesh_from_triangles(tris)
    mesh.validate()
    return mesh


def mesh_from_triangles(tris: np.ndarray) -> TriangleMesh:
    """Build an indexed mesh from a triangle soup, merging coincident vertices."""
    tris = np.asarray(tris, dtype=np.float64).reshape(-1, 3, 3)
    if len(tris) == 0:
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    flat = tris.reshape(-1, 3)
    keys = np.round(flat / MERGE_TOL).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    # keep vertices in first-seen order for stable indexing
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    vertices = flat[first[order]]
    triangles = rank[inverse.reshape(-1)].reshape(-1, 3)
    return TriangleMesh(vertices, triangles)


def _looks_binary(data: bytes) -> bool:
    if len(data) >= 84:
        (n,) = struct.unpack_from("<I", data, 80)
        if 84 + 50 * n == len(data):
            return True
    return not data.lstrip()[:5].lower() == b"solid"


def _parse_binary(data: bytes) -> np.ndarray:
    if len(data) < 84:
        raise MeshParseError("truncated binary STL header", offset=len(data))
    (n,) = struct.unpack_from("<I", data, 80)
    need = 84 + 50 * n
    if len(data) < need:
        bad = 84 + 50 * ((len(data) - 84) // 50)
        raise MeshParseError(
            f"binary STL declares {n} triangles but the stream ends early", offset=bad
        )
    rec = np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    arr = np.frombuffer(data, dtype=rec, count=n, offset=84)
    tris = arr["v"].astype(np.float64)
    finite = np.isfinite(tris).all(axis=(1, 2))
    if not finite.all():
        k = int(np.nonzero(~finite)[0][0])
        raise MeshParseError("non-finite vertex coordinate", offset=84 + 50 * k + 12)
    return tris


def _parse_ascii(data: bytes) -> np.ndarray:
    tris: list[list[list[float]]] = []
    current: list[list[float]] = []
    offset = 0
    saw_solid = False
    for raw in data.splitlines(keepends=True):
        line = raw.strip()
        pos = offset
        offset += len(raw)
        if not line:
            continue
        try:
            words = line.decode("ascii").split()
        except UnicodeDecodeError:
            raise MeshParseError("non-ASCII bytes in ASCII STL", offset=pos) from None
        head = words[0].lower()
        if head == "solid":
            saw_solid = True
        elif not saw_solid:
            raise MeshParseError("ASCII STL must start with 'solid'", offset=pos)
        elif head == "vertex":
            if len(words) != 4:
                raise MeshParseError("vertex needs three coordinates", offset=pos)
            try:
                xyz = [float(w) for w in words[1:]]
            except ValueError:
                raise MeshParseError("malformed vertex coordinate", offset=pos) from None
            if not all(math.isfinite(c) for c in xyz):
                raise MeshParseError("non-finite vertex coordinate", offset=pos)
            current.append(xyz)
        elif head == "facet":
            current = []
        elif head == "endfacet":
            if len(current) != 3:
                raise MeshParseError(
                    f"facet has {len(current)} vertices, expected 3", offset=pos
                )
            tris.append(current)
            current = []
        elif head in ("outer", "endloop", "endsolid"):
            pass
        else:
            raise MeshParseError(f"unexpected keyword {words[0]!r}", offset=pos)
    if not saw_solid:
        raise MeshParseError("empty ASCII STL", offset=0)
    return np.asarray(tris, dtype=np.float64).reshape(-1, 3, 3)


def _normals(tris: np.ndarray) -> np.ndarray:
    n = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    length = np.linalg.norm(n, axis=1, keepdims=True)
    return np.divide(n, length, out=np.zeros_like(n), where=length > 0)


def to_stl_binary(mesh: TriangleMesh, header: bytes = b"foamfab") -> bytes:
    tris = mesh.triangle_coords
    buf = io.BytesIO()
    buf.write(header[:80].ljust(80, b"\0"))
    buf.write(struct.pack("<I", len(tris)))
    rec = np.zeros(
        len(tris), dtype=[("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")]
    )
    rec["normal"] = _normals(tris)
    rec["v"] = tris
    buf.write(rec.tobytes())
    return buf.getvalue()


def to_stl_ascii(mesh: TriangleMesh, name: str = "foamfab") -> bytes:
    lines = [f"solid {name}"]
    for tri, n in zip(mesh.triangle_coords, _normals(mesh.triangle_coords)):
        lines.append(f"  facet normal {n[0]:.6e} {n[1]:.6e} {n[2]:.6e}")
        lines.append("    outer loop")
        for v in tri:
            lines.append(f"      vertex {v[0]:.9e} {v[1]:.9e} {v[2]:.9e}")
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append(f"endsolid {name}")
    return ("\n".join(lines) + "\n").encode("ascii")


def write_stl(mesh: TriangleMesh, path, binary: bool = True) -> None:
    data = to_stl_binary(mesh) if binary else to_stl_ascii(mesh)
    with open(path, "wb") as fh:
        fh.write(data)


# --------------------------------------------------------------------------
# primitives (used by tests, the demo job and the benchmark)


def box_mesh(lo, hi) -> TriangleMesh:
    """Axis-aligned box with outward-facing triangles."""
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    v = np.array(
        [
            [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
            [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
        ],
        dtype=np.float64,
    )
    t = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom
            [4, 5, 6], [4, 6, 7],  # top
            [0, 1, 5], [0, 5, 4],
            [1, 2, 6], [1, 6, 5],
            [2, 3, 7], [2, 7, 6],
            [3, 0, 4], [3, 4, 7],
        ]
    )
    return TriangleMesh(v, t)


def icosphere(radius: float = 1.0, subdivisions: int = 2, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Geodesic sphere; ``20 * 4**subdivisions`` triangles."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    v = [np.array(p, dtype=np.float64) / np.linalg.norm(p) for p in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = v[i] + v[j]
                v.append(m / np.linalg.norm(m))
                cache[key] = len(v) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    vertices = np.array(v) * radius + np.asarray(center, dtype=np.float64)
    return TriangleMesh(vertices, np.array(faces))


def cylinder_mesh(
    radius: float, height: float, segments: int = 128, center_xy=(0.0, 0.0), z0: float = 0.0
) -> TriangleMesh:
    """Closed vertical prism approximating a cylinder."""
    ang = 2.0 * math.pi * np.arange(segments) / segments
    ring = np.stack([np.cos(ang) * radius + center_xy[0], np.sin(ang) * radius + center_xy[1]], 1)
    bottom = np.column_stack([ring, np.full(segments, z0)])
    top = np.column_stack([ring, np.full(segments, z0 + height)])
    cb = [center_xy[0], center_xy[1], z0]
    ct = [center_xy[0], center_xy[1], z0 + height]
    v = np.vstack([bottom, top, [cb, ct]])
    ib, it = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces += [(ib, j, i), (it, segments + i, segments + j)]
        faces += [(i, j, segments + j), (i, segments + j, segments + i)]
    return TriangleMesh(v, np.array(faces))
