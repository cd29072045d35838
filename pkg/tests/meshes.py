"""Extra test solids built from triangle soups."""
import math

import numpy as np

from foamfab.geometry import box_mesh, mesh_from_triangles


def flipped(mesh):
    return mesh.triangle_coords[:, ::-1, :]


def hollow_box(lo, hi, cavity_lo, cavity_hi):
    """Box with a closed internal void (two shells)."""
    outer = box_mesh(lo, hi).triangle_coords
    inner = flipped(box_mesh(cavity_lo, cavity_hi))
    return mesh_from_triangles(np.concatenate([outer, inner]))


def tube(r_out, r_in, height, segments=96, center=(0.0, 0.0)):
    """Vertical annular prism: its silhouette has one outer boundary and one hole."""
    cx, cy = center
    ang = 2 * math.pi * np.arange(segments) / segments
    tris = []

    def ring(r, z):
        return [(cx + r * math.cos(a), cy + r * math.sin(a), z) for a in ang]

    ob, ot = ring(r_out, 0.0), ring(r_out, height)
    ib, it = ring(r_in, 0.0), ring(r_in, height)
    for i in range(segments):
        j = (i + 1) % segments
        tris += [(ob[i], ob[j], ot[j]), (ob[i], ot[j], ot[i])]  # outer wall
        tris += [(ib[j], ib[i], it[i]), (ib[j], it[i], it[j])]  # inner wall
        tris += [(ot[i], ot[j], it[j]), (ot[i], it[j], it[i])]  # top
        tris += [(ob[j], ob[i], ib[i]), (ob[j], ib[i], ib[j])]  # bottom
    return mesh_from_triangles(np.array(tris))
