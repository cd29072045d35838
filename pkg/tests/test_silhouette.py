import math

import numpy as np
import pytest

from foamfab.geometry import (
    BodySpec,
    FoamBlock,
    box_mesh,
    build_grid,
    cylinder_mesh,
    dump_contours,
    icosphere,
    mesh_from_triangles,
    project_silhouette,
    rasterize,
)
from foamfab.geometry.silhouette import Contour, marching_squares

from meshes import tube


def test_box_outline(box30):
    cs = project_silhouette(BodySpec(box30), 0.25)
    assert len(cs) == 1
    c = cs[0]
    assert c.closed and not c.hole
    # allowed slack: 2 * resolution per corner
    assert abs(c.perimeter - 120.0) <= 2 * 0.25 * 4
    assert c.signed_area == pytest.approx(900.0, rel=0.02)


def test_cylinder_outline():
    body = BodySpec(cylinder_mesh(10.0, 40.0, 128, (30, 30)))
    cs = project_silhouette(body, 0.25)
    assert len(cs) == 1
    assert abs(cs[0].perimeter - 2 * math.pi * 10) / (2 * math.pi * 10) < 0.03


def test_empty_body():
    assert project_silhouette(BodySpec(mesh_from_triangles(np.zeros((0, 3, 3))))) == []


def test_tube_has_hole():
    cs = project_silhouette(BodySpec(tube(12.0, 6.0, 20.0, center=(30, 30))), 0.25)
    assert [c.hole for c in cs] == [False, True]
    outer, hole = cs
    assert outer.signed_area > 0 > hole.signed_area
    assert outer.perimeter == pytest.approx(2 * math.pi * 12, rel=0.03)
    assert hole.perimeter == pytest.approx(2 * math.pi * 6, rel=0.03)


def test_two_bodies_in_one_mesh():
    a = box_mesh((5, 5, 0), (15, 15, 10)).triangle_coords
    b = box_mesh((25, 5, 0), (35, 15, 10)).triangle_coords
    cs = project_silhouette(BodySpec(mesh_from_triangles(np.concatenate([a, b]))), 0.5)
    assert len(cs) == 2 and not any(c.hole for c in cs)


def test_column_centres_inside_silhouette(foam):
    body = BodySpec(icosphere(10.0, 3, (30, 30, 25)))
    res = 0.25
    cs = project_silhouette(body, res)
    for col in rasterize(body, build_grid(foam, 2.0)):
        x, y = col.center
        assert any(c.contains(x, y) or c.distance(x, y) <= res for c in cs if not c.hole)


def test_deterministic(box30):
    a = dump_contours(project_silhouette(BodySpec(box30)))
    b = dump_contours(project_silhouette(BodySpec(box30)))
    assert a == b


def test_marching_squares_saddle():
    v = np.zeros((4, 4))
    v[1, 1] = v[2, 2] = 0.9
    # saddle-cell mean 0.45 is below the level: two separate loops
    assert len(marching_squares(v)) == 2
    v[1, 2] = v[2, 1] = 0.3
    # now the saddle mean (0.6) is inside: one joined loop
    assert len(marching_squares(v)) == 1


def test_contour_requires_closure():
    with pytest.raises(Exception):
        Contour(((0, 0), (1, 0), (1, 1)))
