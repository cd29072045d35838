import numpy as np
import pytest

from foamfab import kernels
from foamfab._accel import USE_NUMBA
from foamfab.geometry import icosphere

needs_numba = pytest.mark.skipif(not USE_NUMBA, reason="numba backend disabled")


def _random_case(seed):
    rng = np.random.default_rng(seed)
    mesh = icosphere(5.0, 2, rng.uniform(-1, 1, 3))
    pts = rng.uniform(-6, 6, (400, 2))
    return mesh.triangle_coords, pts


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_crossings_backends_agree(seed):
    tris, pts = _random_case(seed)
    o1, z1, d1 = kernels.vertical_crossings_numpy(tris, pts[:, 0], pts[:, 1])
    o2, z2, d2 = kernels.vertical_crossings_numba(tris, pts[:, 0], pts[:, 1])
    np.testing.assert_array_equal(o1, o2)
    np.testing.assert_array_equal(d1, d2)
    np.testing.assert_allclose(z1, z2, rtol=0, atol=1e-12)


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_coverage_backends_agree(seed):
    tris, pts = _random_case(seed)
    a = kernels.projected_coverage_numpy(tris, pts[:, 0], pts[:, 1])
    b = kernels.projected_coverage_numba(tris, pts[:, 0], pts[:, 1])
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize(
    "impl", [kernels.vertical_crossings_numpy, pytest.param(kernels.vertical_crossings_numba, marks=needs_numba)]
)
def test_single_triangle_hit_and_graze(impl):
    tri = np.array([[[0, 0, 1], [2, 0, 1], [0, 2, 3]]], dtype=float)
    px = np.array([0.5, 1.0, 5.0])
    py = np.array([0.5, 0.0, 5.0])  # inside, on an edge, outside
    offsets, zs, deg = impl(tri, px, py)
    assert list(np.diff(offsets)) == [1, 0, 0]
    assert zs[0] == pytest.approx(1.5)
    assert list(deg) == [False, True, False]


def test_vertical_triangles_are_ignored():
    tri = np.array([[[0, 0, 0], [1, 0, 0], [0, 0, 1]]], dtype=float)
    offsets, zs, deg = kernels.vertical_crossings(tri, np.array([0.2]), np.array([0.0]))
    assert offsets[-1] == 0 and not deg[0]


def _brute_crossings(tris, x, y):
    # barycentric test with no binning or tolerance, for interior points only
    out = []
    for (ax, ay, az), (bx, by, bz), (cx, cy, cz) in tris:
        d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if d == 0:
            continue
        l1 = ((bx - x) * (cy - y) - (by - y) * (cx - x)) / d
        l2 = ((cx - x) * (ay - y) - (cy - y) * (ax - x)) / d
        l3 = 1 - l1 - l2
        if min(l1, l2, l3) > 1e-6:
            out.append(l1 * az + l2 * bz + l3 * cz)
    return sorted(out)


@pytest.mark.parametrize(
    "impl", [kernels.vertical_crossings_numpy, pytest.param(kernels.vertical_crossings_numba, marks=needs_numba)]
)
def test_binned_crossings_match_brute_force(impl):
    tris = icosphere(5.0, 3, (1.0, -2.0, 0.0)).triangle_coords
    rng = np.random.default_rng(7)
    px = rng.uniform(-8, 10, 400)
    py = rng.uniform(-11, 7, 400)
    offsets, zs, deg = impl(tris, px, py)
    for i in range(400):
        if deg[i]:
            continue
        np.testing.assert_allclose(zs[offsets[i]:offsets[i + 1]], _brute_crossings(tris, px[i], py[i]), atol=1e-9)


def test_bins_cover_every_triangle_box():
    tris = icosphere(5.0, 2).triangle_coords
    x0, y0, dx, dy, nx, ny, starts, items = kernels.bin_triangles(tris)
    assert starts[-1] == items.size and np.all(np.diff(starts) >= 0)
    for t in range(tris.shape[0]):
        cx, cy = tris[t, :, :2].mean(axis=0)
        k = min(int((cy - y0) // dy), ny - 1) * nx + min(int((cx - x0) // dx), nx - 1)
        assert t in items[starts[k]:starts[k + 1]]
