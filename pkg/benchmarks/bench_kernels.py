"""Time the numba and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--subdivisions 4 5 6] [--side 0.25]

Rays are the centres of a hex grid over a 60 x 60 mm foam block; the mesh
is an icosphere of radius 10 mm in the middle of it. The first numba call
(compilation or cache load) is timed separately.
"""
import argparse
import math
import time

import numpy as np

from foamfab import kernels
from foamfab.geometry import FoamBlock, build_grid, icosphere


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--subdivisions", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--side", type=float, default=0.25, help="hexagon side, mm")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    grid = build_grid(FoamBlock(60, 60, 50), 1.5 * math.sqrt(3) * args.side**2)
    xy = grid.centers(grid.cells)
    px, py = xy[:, 0].copy(), xy[:, 1].copy()

    t0 = time.perf_counter()
    warm = icosphere(10.0, 1, (30, 30, 25)).triangle_coords
    kernels.vertical_crossings_numba(warm, px[:10], py[:10])
    kernels.projected_coverage_numba(warm, px[:10], py[:10])
    print(f"numba first call: {time.perf_counter() - t0:.2f} s")
    print(f"{len(px)} rays, hexagon side {args.side} mm")
    print(f"{'kernel':<12}{'triangles':>10}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for sub in args.subdivisions:
        tris = icosphere(10.0, sub, (30, 30, 25)).triangle_coords
        for name, a, b in (
            ("crossings", kernels.vertical_crossings_numpy, kernels.vertical_crossings_numba),
            ("coverage", kernels.projected_coverage_numpy, kernels.projected_coverage_numba),
        ):
            ta, ra = best_of(lambda: a(tris, px, py), args.repeat)
            tb, rb = best_of(lambda: b(tris, px, py), args.repeat)
            same = all(np.allclose(x, y) for x, y in zip(ra, rb)) if isinstance(ra, tuple) else np.array_equal(ra, rb)
            flag = "" if same else "  MISMATCH"
            print(f"{name:<12}{len(tris):>10}{ta:>10.3f}{tb:>10.3f}{ta / tb:>8.1f}x{flag}")


if __name__ == "__main__":
    main()
