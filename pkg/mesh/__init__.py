"""
三角网格、NVB 加密与单元几何
"""
from mesh.domains import (
    Domain, SeedTriangulation, polygon_area,
    reference_triangle, unit_square, unit_square_grid, criss_cross_square, notched_square,
)
from mesh.triangulation import (
    AffineMap, EdgeFrame, Mesh, REFERENCE_VERTICES,
    build_initial_mesh, edge_frames, load_mesh, reference_edge_points,
)
from mesh.refinement import refine, refine_uniform, genealogy, prolongate

__all__ = [
    "Domain", "SeedTriangulation", "polygon_area",
    "reference_triangle", "unit_square", "unit_square_grid", "criss_cross_square", "notched_square",
    "AffineMap", "EdgeFrame", "Mesh", "REFERENCE_VERTICES",
    "build_initial_mesh", "edge_frames", "load_mesh", "reference_edge_points",
    "refine", "refine_uniform", "genealogy", "prolongate",
]
