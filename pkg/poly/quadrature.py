"""
参考三角形与参考线段上的数值积分

三角形规则由 Gauss-Jacobi(1,0) 与 Gauss-Legendre 张量积经坍缩映射得到，
权重全正、积分点全部位于三角形内部
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from config import MAX_QUAD_DEGREE
from utils.error_handler import QuadratureError


@dataclass(frozen=True)
class QuadratureRule:
    """积分规则

    points 为参考坐标（三角形为 (n, 2)，线段为 (n,)），weights 之和等于区域测度
    """
    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def barycentric(self) -> np.ndarray:
        """三角形积分点的重心坐标 (n, 3)"""
        pts = np.atleast_2d(self.points)
        return np.column_stack([1.0 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])


def _check_degree(degree: int) -> None:
    if degree < 0 or degree > MAX_QUAD_DEGREE:
        raise QuadratureError(f"不支持的积分精确度 {degree}，范围为 [0, {MAX_QUAD_DEGREE}]")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def quadrature(degree: int) -> QuadratureRule:
    """参考三角形 conv{(0,0),(1,0),(0,1)} 上精确到 degree 次的积分规则"""
    _check_degree(degree)
    n = max(1, math.ceil((degree + 1) / 2))
    xl, wl = roots_legendre(n)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    u = (xl + 1.0) / 2.0
    v = (xj + 1.0) / 2.0
    # x = v, y = (1 - v) u；Jacobi 权 (1 - t) 吸收坍缩映射的 Jacobi 行列式
    x = np.repeat(v, n)
    y = np.outer(1.0 - v, u).ravel()
    w = np.outer(wj, wl).ravel() / 8.0
    return QuadratureRule(points=_frozen(np.column_stack([x, y])), weights=_frozen(w), degree=degree)


@lru_cache(maxsize=None)
def edge_quadrature(degree: int) -> QuadratureRule:
    """[0, 1] 上的 Gauss-Legendre 规则"""
    _check_degree(degree)
    n = max(1, math.ceil((degree + 1) / 2))
    x, w = roots_legendre(n)
    return QuadratureRule(points=_frozen((x + 1.0) / 2.0), weights=_frozen(w / 2.0), degree=degree)
