"""
参考三角形上的正交规范多项式基

单项式在 L2(T̂) 内正交化（加权 QR，等价于 Gram-Schmidt），
标量、向量、对称张量基的质量矩阵都是单位阵
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular

from poly.fields import FieldKind, PolyField, dim_p, eval_monomials
from poly.quadrature import quadrature

SQRT1_2 = np.sqrt(0.5)


@lru_cache(maxsize=None)
def _orthonormal_coefficients(p: int) -> np.ndarray:
    """列 k 为第 k 个正交基函数的单项式系数"""
    rule = quadrature(2 * p)
    V = eval_monomials(p, rule.points) * np.sqrt(rule.weights)[:, None]
    _, R = np.linalg.qr(V)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    R = signs[:, None] * R
    L = solve_triangular(R, np.eye(dim_p(p)), lower=False)
    L.setflags(write=False)
    return L


@dataclass(frozen=True)
class ScalarBasis:
    """P^p(T̂) 的正交规范基"""
    degree: int

    @property
    def dim(self) -> int:
        return dim_p(self.degree)

    @property
    def coefficients(self) -> np.ndarray:
        return _orthonormal_coefficients(self.degree)

    def as_field(self) -> PolyField:
        """批量场，batch 维长度为 dim"""
        L = self.coefficients
        return PolyField(FieldKind.SCALAR, self.degree, L.T[:, None, :].copy())

    def eval(self, points: np.ndarray) -> np.ndarray:
        """(npts, dim)"""
        return eval_monomials(self.degree, points) @ self.coefficients

    def eval_grad(self, points: np.ndarray) -> np.ndarray:
        """(npts, dim, 2)"""
        vals = self.as_field().grad().eval(points)  # (dim, npts, 2)
        return np.transpose(vals, (1, 0, 2))

    def eval_hessian(self, points: np.ndarray) -> np.ndarray:
        """(npts, dim, 2, 2)"""
        vals = self.as_field().hessian().tensor_values(points)
        return np.transpose(vals, (1, 0, 2, 3))


@dataclass(frozen=True)
class VectorBasis:
    """P^p(T̂)² 的正交规范基：先 x 分量 dim 个，再 y 分量 dim 个"""
    degree: int

    @property
    def dim(self) -> int:
        return 2 * dim_p(self.degree)

    def as_field(self) -> PolyField:
        L = _orthonormal_coefficients(self.degree)
        n = dim_p(self.degree)
        coeffs = np.zeros((2 * n, 2, n))
        coeffs[:n, 0, :] = L.T
        coeffs[n:, 1, :] = L.T
        return PolyField(FieldKind.VECTOR, self.degree, coeffs)

    def eval(self, points: np.ndarray) -> np.ndarray:
        """(npts, dim, 2)"""
        return np.transpose(self.as_field().eval(points), (1, 0, 2))


@dataclass(frozen=True)
class SymTensorBasis:
    """P^{p,s}(T̂) 的正交规范基：xx、yy、xy 三组，xy 组乘 1/√2 使张量内积下规范"""
    degree: int

    @property
    def dim(self) -> int:
        return 3 * dim_p(self.degree)

    def as_field(self) -> PolyField:
        L = _orthonormal_coefficients(self.degree)
        n = dim_p(self.degree)
        coeffs = np.zeros((3 * n, 3, n))
        coeffs[:n, 0, :] = L.T
        coeffs[n:2 * n, 1, :] = L.T
        coeffs[2 * n:, 2, :] = SQRT1_2 * L.T
        return PolyField(FieldKind.TENSOR, self.degree, coeffs)

    def eval(self, points: np.ndarray) -> np.ndarray:
        """(npts, dim, 2, 2)，每个成员都按构造对称"""
        return np.transpose(self.as_field().tensor_values(points), (1, 0, 2, 3))
