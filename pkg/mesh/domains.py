"""
多边形区域与种子三角剖分
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class Domain:
    """逆时针多边形区域；corner 为奇异角点（若有）"""
    name: str
    polygon: np.ndarray
    corner: Optional[Tuple[float, float]] = None


@dataclass(frozen=True, eq=False)
class SeedTriangulation:
    vertices: np.ndarray
    triangles: np.ndarray


def polygon_area(polygon: np.ndarray) -> float:
    """鞋带公式（逆时针为正）"""
    P = np.asarray(polygon, dtype=float)
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def reference_triangle() -> Tuple[Domain, SeedTriangulation]:
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return Domain("reference", verts), SeedTriangulation(verts, np.array([[0, 1, 2]]))


def unit_square() -> Tuple[Domain, SeedTriangulation]:
    """单位正方形，对角线剖分为 2 个三角形"""
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    return Domain("unit_square", verts), SeedTriangulation(verts, tris)


def unit_square_grid(n: int = 4) -> Tuple[Domain, SeedTriangulation]:
    """单位正方形上 n×n 的方格，每格沿同向对角线剖分；n = 2^k 时网格尺寸与 2 三角形种子一致加密 k 次相同"""
    if n < 1:
        raise ValueError("方格数至少为 1")
    ticks = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(ticks, ticks, indexing="xy")
    verts = np.column_stack([X.ravel(), Y.ravel()])
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            tris.extend([[a, b, c], [a, c, d]])
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return Domain("unit_square", corners), SeedTriangulation(verts, np.array(tris))


def criss_cross_square() -> Tuple[Domain, SeedTriangulation]:
    """单位正方形，4 个三角形交于中心"""
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    verts = np.vstack([corners, [[0.5, 0.5]]])
    tris = np.array([[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]])
    return Domain("unit_square", corners), SeedTriangulation(verts, tris)


def notched_square(opening: float = 5.0 * math.pi / 4.0) -> Tuple[Domain, SeedTriangulation]:
    """(-1,1)² 去掉以负 x 轴为中心的闭楔形，角点在原点，区域侧张角为 opening

    两条固支边沿 φ = ±opening/2；opening ∈ (π, 3π/2) 时两条边与 y = ±1 相交
    """
    half = opening / 2.0
    if not (math.pi / 2.0 < half < 3.0 * math.pi / 4.0):
        raise ValueError(f"张角 {opening} 不在 (π, 3π/2) 内")
    # φ = half 的射线与 y = 1 的交点
    x_top = math.cos(half) / math.sin(half)
    verts = np.array([
        [0.0, 0.0],
        [x_top, -1.0],
        [1.0, -1.0],
        [1.0, 0.0],
        [1.0, 1.0],
        [x_top, 1.0],
    ])
    polygon = verts.copy()
    tris = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5]])
    return Domain("notched_square", polygon, corner=(0.0, 0.0)), SeedTriangulation(verts, tris)
