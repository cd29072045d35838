"""Mesh ingestion, hex grids, column rasterisation and silhouettes."""
from .grid import HEX_DIRECTIONS, FoamBlock, HexGrid, build_grid
from .mesh import (
    TriangleMesh,
    box_mesh,
    cylinder_mesh,
    icosphere,
    load_mesh,
    mesh_from_triangles,
    point_in_solid,
    points_in_solid,
    to_stl_ascii,
    to_stl_binary,
    write_stl,
)
from .raster import BodySpec, Column, check_overlaps, rasterize, total_volume
from .silhouette import Contour, project_silhouette
from .tabular import dump_columns, dump_contours, load_columns, load_contours

__all__ = [
    "HEX_DIRECTIONS",
    "BodySpec",
    "Column",
    "Contour",
    "FoamBlock",
    "HexGrid",
    "TriangleMesh",
    "box_mesh",
    "build_grid",
    "check_overlaps",
    "cylinder_mesh",
    "dump_columns",
    "dump_contours",
    "icosphere",
    "load_columns",
    "load_contours",
    "load_mesh",
    "mesh_from_triangles",
    "point_in_solid",
    "points_in_solid",
    "project_silhouette",
    "rasterize",
    "to_stl_ascii",
    "to_stl_binary",
    "total_volume",
    "write_stl",
]
