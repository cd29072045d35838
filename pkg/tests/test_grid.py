import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from foamfab.errors import GeometryError
from foamfab.geometry import HEX_DIRECTIONS, FoamBlock, build_grid

from conftest import UNIT_HEX_AREA


def test_unit_hexagon_pitch():
    g = build_grid(FoamBlock(20, 20, 10), UNIT_HEX_AREA, 1.0)
    assert g.side == pytest.approx(1.0)
    assert g.pitch == pytest.approx(math.sqrt(3))
    assert g.density == pytest.approx(1.0)


def test_quarter_infill_doubles_pitch():
    foam = FoamBlock(20, 20, 10)
    full = build_grid(foam, 5.0, 1.0)
    quarter = build_grid(foam, 5.0, 0.25)
    assert quarter.pitch == pytest.approx(2 * full.pitch)
    assert quarter.density == pytest.approx(0.25)
    assert quarter.cell_area == full.cell_area


@given(st.floats(0.05, 1.0))
def test_density_equals_infill(r):
    g = build_grid(FoamBlock(30, 20, 10), 2.0, r)
    assert g.density == pytest.approx(r, rel=1e-12)


def test_origin_cell_on_footprint_center():
    foam = FoamBlock(37, 23, 10)
    g = build_grid(foam, 3.0)
    assert g.center(0, 0) == pytest.approx((18.5, 11.5))
    assert (0, 0) in g.cells


def test_neighbours_at_pitch_distance():
    g = build_grid(FoamBlock(20, 20, 10), 2.0)
    cx, cy = g.center(1, -2)
    for q, r in g.neighbors(1, -2):
        x, y = g.center(q, r)
        assert math.hypot(x - cx, y - cy) == pytest.approx(g.pitch)
    assert list(HEX_DIRECTIONS) == sorted(HEX_DIRECTIONS)


def test_cells_cover_footprint_and_are_sorted():
    foam = FoamBlock(12, 9, 5)
    g = build_grid(foam, 1.0)
    cells = g.cells
    assert list(cells) == sorted(cells)
    for q, r in cells:
        x, y = g.center(q, r)
        assert -1e-9 <= x <= 12 + 1e-9 and -1e-9 <= y <= 9 + 1e-9
    # interior cells have all six neighbours inside the grid
    inside = set(cells)
    interior = [c for c in cells if all(n in inside for n in g.neighbors(*c))]
    assert interior
    # count matches footprint / cell-area within the boundary layer
    assert abs(len(cells) - 12 * 9 / 1.0) < 2 * (12 + 9) / g.pitch + 4


def test_hexagon_polygon_area():
    g = build_grid(FoamBlock(20, 20, 10), 4.0, 0.5)
    pts = g.hexagon(0, 0)
    area = 0.5 * abs(sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1])))
    assert area == pytest.approx(4.0)
    assert max(p[1] for p in pts) == pytest.approx(g.center(0, 0)[1] + g.side)  # pointy top


@pytest.mark.parametrize("area,infill", [(0, 1), (-1, 1), (1, 0), (1, 1.5)])
def test_invalid_arguments(area, infill):
    with pytest.raises(GeometryError):
        build_grid(FoamBlock(10, 10, 10), area, infill)


def test_cell_larger_than_footprint():
    with pytest.raises(GeometryError, match="footprint"):
        build_grid(FoamBlock(2, 2, 10), 5.0)


def test_foam_dimensions_positive():
    with pytest.raises(GeometryError):
        FoamBlock(0, 1, 1)
