"""Hot loops: vertical ray crossings and projected-triangle coverage.

Each kernel has a numba implementation and a pure-numpy implementation with
identical outputs. ``vertical_crossings`` and ``projected_coverage`` dispatch
on :data:`foamfab._accel.USE_NUMBA`; the ``*_numpy`` / ``*_numba`` variants
stay importable so the benchmark can compare them side by side.
"""
from __future__ import annotations

import numpy as np

from . import _accel

# Point-to-edge distance (mm) below which a vertical ray is treated as grazing
# an edge or vertex of a triangle.
EDGE_TOL = 1e-9
# Projected doubled area (mm^2) below which a triangle counts as vertical.
FLAT_TOL = 2e-9


def _edge_lengths(tris: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, b, c = tris[:, 0, :2], tris[:, 1, :2], tris[:, 2, :2]
    lbc = np.hypot(*(c - b).T)
    lca = np.hypot(*(a - c).T)
    lab = np.hypot(*(b - a).T)
    return lbc, lca, lab


def bin_triangles(tris: np.ndarray, per_bin: float = 1.0):
    """Bucket triangles by their (tolerance-padded) xy bounding boxes.

    Returns ``(x0, y0, dx, dy, nx, ny, starts, items)``: the triangles whose box
    touches bin ``(ix, iy)`` are ``items[starts[k]:starts[k + 1]]`` with
    ``k = iy * nx + ix``. About ``per_bin`` triangles land in each bin.
    """
    n = tris.shape[0]
    if n == 0:
        return 0.0, 0.0, 1.0, 1.0, 1, 1, np.zeros(2, dtype=np.int64), np.zeros(0, dtype=np.int64)
    lo = tris[:, :, :2].min(axis=1) - EDGE_TOL
    hi = tris[:, :, :2].max(axis=1) + EDGE_TOL
    x0, y0 = lo.min(axis=0)
    x1, y1 = hi.max(axis=0)
    side = max(int(np.sqrt(n / per_bin)), 1)
    nx = ny = side
    dx = max((x1 - x0) / nx, 1e-12)
    dy = max((y1 - y0) / ny, 1e-12)
    ix0 = np.clip(((lo[:, 0] - x0) // dx).astype(np.int64), 0, nx - 1)
    ix1 = np.clip(((hi[:, 0] - x0) // dx).astype(np.int64), 0, nx - 1)
    iy0 = np.clip(((lo[:, 1] - y0) // dy).astype(np.int64), 0, ny - 1)
    iy1 = np.clip(((hi[:, 1] - y0) // dy).astype(np.int64), 0, ny - 1)
    w = ix1 - ix0 + 1
    counts = w * (iy1 - iy0 + 1)
    tri = np.repeat(np.arange(n, dtype=np.int64), counts)
    first = np.cumsum(counts) - counts
    k = np.arange(tri.shape[0], dtype=np.int64) - np.repeat(first, counts)
    bins = (iy0[tri] + k // w[tri]) * nx + ix0[tri] + k % w[tri]
    order = np.argsort(bins, kind="stable")
    items = tri[order]
    starts = np.zeros(nx * ny + 1, dtype=np.int64)
    np.cumsum(np.bincount(bins, minlength=nx * ny), out=starts[1:])
    return float(x0), float(y0), float(dx), float(dy), nx, ny, starts, items


# --------------------------------------------------------------------------
# numpy reference paths


def vertical_crossings_numpy(tris, px, py):
    """Intersect vertical lines ``(px[i], py[i])`` with every triangle.

    Returns ``(offsets, zs, degenerate)``: the sorted crossing heights of line
    ``i`` are ``zs[offsets[i]:offsets[i + 1]]``. ``degenerate[i]`` is set when
    the line grazes an edge or vertex, in which case its crossings are not
    trustworthy.
    """
    tris = np.ascontiguousarray(tris, dtype=np.float64)
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    n = px.shape[0]
    degenerate = np.zeros(n, dtype=np.bool_)
    hit_idx = []
    hit_z = []
    lbc, lca, lab = _edge_lengths(tris)
    by_x = np.argsort(px, kind="stable")
    sx = px[by_x]
    for t in range(tris.shape[0]):
        (ax, ay, az), (bx, by, bz), (cx, cy, cz) = tris[t]
        d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if abs(d) <= FLAT_TOL:
            continue
        lo_x, hi_x = min(ax, bx, cx) - EDGE_TOL, max(ax, bx, cx) + EDGE_TOL
        lo_y, hi_y = min(ay, by, cy) - EDGE_TOL, max(ay, by, cy) + EDGE_TOL
        cand = by_x[np.searchsorted(sx, lo_x, "left"):np.searchsorted(sx, hi_x, "right")]
        cand = cand[(py[cand] >= lo_y) & (py[cand] <= hi_y)]
        if cand.size == 0:
            continue
        x = px[cand]
        y = py[cand]
        s = 1.0 if d > 0 else -1.0
        wa = ((cx - bx) * (y - by) - (cy - by) * (x - bx)) * s
        wb = ((ax - cx) * (y - cy) - (ay - cy) * (x - cx)) * s
        wc = ((bx - ax) * (y - ay) - (by - ay) * (x - ax)) * s
        da, db, dc = wa / lbc[t], wb / lca[t], wc / lab[t]
        dmin = np.minimum(np.minimum(da, db), dc)
        near = dmin >= -EDGE_TOL
        graze = near & (dmin <= EDGE_TOL)
        degenerate[cand[graze]] = True
        inside = dmin > EDGE_TOL
        if inside.any():
            w = abs(d)
            z = (wa[inside] * az + wb[inside] * bz + wc[inside] * cz) / w
            hit_idx.append(cand[inside])
            hit_z.append(z)
    if hit_idx:
        idx = np.concatenate(hit_idx)
        zs = np.concatenate(hit_z)
        order = np.lexsort((zs, idx))
        idx = idx[order]
        zs = zs[order]
        counts = np.bincount(idx, minlength=n)
    else:
        zs = np.zeros(0, dtype=np.float64)
        counts = np.zeros(n, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, zs, degenerate


def projected_coverage_numpy(tris, px, py):
    """True where the vertical line through ``(px, py)`` meets the closed
    xy-projection of any non-vertical triangle."""
    tris = np.ascontiguousarray(tris, dtype=np.float64)
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    covered = np.zeros(px.shape[0], dtype=np.bool_)
    lbc, lca, lab = _edge_lengths(tris)
    by_x = np.argsort(px, kind="stable")
    sx = px[by_x]
    for t in range(tris.shape[0]):
        (ax, ay, _), (bx, by, _), (cx, cy, _) = tris[t]
        d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if abs(d) <= FLAT_TOL:
            continue
        cand = by_x[
            np.searchsorted(sx, min(ax, bx, cx) - EDGE_TOL, "left"):
            np.searchsorted(sx, max(ax, bx, cx) + EDGE_TOL, "right")
        ]
        cand = cand[
            ~covered[cand]
            & (py[cand] >= min(ay, by, cy) - EDGE_TOL)
            & (py[cand] <= max(ay, by, cy) + EDGE_TOL)
        ]
        if cand.size == 0:
            continue
        x = px[cand]
        y = py[cand]
        s = 1.0 if d > 0 else -1.0
        da = ((cx - bx) * (y - by) - (cy - by) * (x - bx)) * s / lbc[t]
        db = ((ax - cx) * (y - cy) - (ay - cy) * (x - cx)) * s / lca[t]
        dc = ((bx - ax) * (y - ay) - (by - ay) * (x - ax)) * s / lab[t]
        inside = np.minimum(np.minimum(da, db), dc) >= -EDGE_TOL
        covered[cand[inside]] = True
    return covered


# --------------------------------------------------------------------------
# numba paths


@_accel.njit(cache=True)
def _bin_of(x, y, x0, y0, dx, dy, nx, ny):
    fx = (x - x0) // dx
    fy = (y - y0) // dy
    if fx < 0 or fy < 0:
        # only possible beyond the padded boxes; clamp, the box test rejects
        fx = max(fx, 0.0)
        fy = max(fy, 0.0)
    return int(min(fy, ny - 1)) * nx + int(min(fx, nx - 1))


@_accel.njit(cache=True)
def _crossings_pass(tris, px, py, lbc, lca, lab, bins, zs, offsets, degenerate, fill):
    x0, y0, dx, dy, nx, ny, starts, items = bins
    n = px.shape[0]
    for i in range(n):
        x = px[i]
        y = py[i]
        k = 0
        b = _bin_of(x, y, x0, y0, dx, dy, nx, ny)
        for j in range(starts[b], starts[b + 1]):
            t = items[j]
            ax = tris[t, 0, 0]
            ay = tris[t, 0, 1]
            bx = tris[t, 1, 0]
            by = tris[t, 1, 1]
            cx = tris[t, 2, 0]
            cy = tris[t, 2, 1]
            if x < min(ax, bx, cx) - EDGE_TOL or x > max(ax, bx, cx) + EDGE_TOL:
                continue
            if y < min(ay, by, cy) - EDGE_TOL or y > max(ay, by, cy) + EDGE_TOL:
                continue
            d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if abs(d) <= FLAT_TOL:
                continue
            s = 1.0 if d > 0 else -1.0
            wa = ((cx - bx) * (y - by) - (cy - by) * (x - bx)) * s
            wb = ((ax - cx) * (y - cy) - (ay - cy) * (x - cx)) * s
            wc = ((bx - ax) * (y - ay) - (by - ay) * (x - ax)) * s
            dmin = min(wa / lbc[t], wb / lca[t], wc / lab[t])
            if dmin < -EDGE_TOL:
                continue
            if dmin <= EDGE_TOL:
                degenerate[i] = True
                continue
            if fill:
                z = (wa * tris[t, 0, 2] + wb * tris[t, 1, 2] + wc * tris[t, 2, 2]) / abs(d)
                zs[offsets[i] + k] = z
            k += 1
        if fill:
            seg = zs[offsets[i]:offsets[i] + k]
            seg.sort()
        else:
            offsets[i + 1] = k


def vertical_crossings_numba(tris, px, py):
    tris = np.ascontiguousarray(tris, dtype=np.float64)
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    n = px.shape[0]
    lbc, lca, lab = _edge_lengths(tris)
    offsets = np.zeros(n + 1, dtype=np.int64)
    degenerate = np.zeros(n, dtype=np.bool_)
    empty = np.zeros(0, dtype=np.float64)
    bins = bin_triangles(tris)
    _crossings_pass(tris, px, py, lbc, lca, lab, bins, empty, offsets, degenerate, False)
    offsets = np.cumsum(offsets)
    zs = np.zeros(offsets[-1], dtype=np.float64)
    degenerate[:] = False
    _crossings_pass(tris, px, py, lbc, lca, lab, bins, zs, offsets, degenerate, True)
    return offsets, zs, degenerate


@_accel.njit(cache=True)
def _coverage_loop(tris, px, py, lbc, lca, lab, bins, covered):
    x0, y0, dx, dy, nx, ny, starts, items = bins
    for i in range(px.shape[0]):
        x = px[i]
        y = py[i]
        b = _bin_of(x, y, x0, y0, dx, dy, nx, ny)
        for j in range(starts[b], starts[b + 1]):
            t = items[j]
            ax = tris[t, 0, 0]
            ay = tris[t, 0, 1]
            bx = tris[t, 1, 0]
            by = tris[t, 1, 1]
            cx = tris[t, 2, 0]
            cy = tris[t, 2, 1]
            if x < min(ax, bx, cx) - EDGE_TOL or x > max(ax, bx, cx) + EDGE_TOL:
                continue
            if y < min(ay, by, cy) - EDGE_TOL or y > max(ay, by, cy) + EDGE_TOL:
                continue
            d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if abs(d) <= FLAT_TOL:
                continue
            s = 1.0 if d > 0 else -1.0
            da = ((cx - bx) * (y - by) - (cy - by) * (x - bx)) * s / lbc[t]
            db = ((ax - cx) * (y - cy) - (ay - cy) * (x - cx)) * s / lca[t]
            dc = ((bx - ax) * (y - ay) - (by - ay) * (x - ax)) * s / lab[t]
            if min(da, db, dc) >= -EDGE_TOL:
                covered[i] = True
                break


def projected_coverage_numba(tris, px, py):
    tris = np.ascontiguousarray(tris, dtype=np.float64)
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    lbc, lca, lab = _edge_lengths(tris)
    covered = np.zeros(px.shape[0], dtype=np.bool_)
    _coverage_loop(tris, px, py, lbc, lca, lab, bin_triangles(tris), covered)
    return covered


# --------------------------------------------------------------------------
# dispatch


def vertical_crossings(tris, px, py):
    if _accel.USE_NUMBA:
        return vertical_crossings_numba(tris, px, py)
    return vertical_crossings_numpy(tris, px, py)


def projected_coverage(tris, px, py):
    if _accel.USE_NUMBA:
        return projected_coverage_numba(tris, px, py)
    return projected_coverage_numpy(tris, px, py)
