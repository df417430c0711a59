"""
单元上的 L2 投影与积分
"""
from typing import Callable, Optional, Union

import numpy as np

from config import VOLUME_QUAD_DEGREE
from poly.basis import ScalarBasis
from poly.fields import FieldKind, PolyField
from poly.quadrature import quadrature

FieldLike = Union[PolyField, Callable[[np.ndarray], np.ndarray]]


def _sample(f: FieldLike, kind: FieldKind, ref_points: np.ndarray, amap) -> np.ndarray:
    """返回 (*batch, npts, ncomp)"""
    if isinstance(f, PolyField):
        return f.eval(ref_points)
    phys = ref_points if amap is None else amap.to_physical(ref_points)
    vals = np.asarray(f(phys), dtype=float)
    return vals.reshape(len(ref_points), kind.ncomp)


def l2_project(f: FieldLike, p: int, amap=None, kind: Optional[FieldKind] = None,
               quad_degree: Optional[int] = None) -> PolyField:
    """L2(T) 投影到 P^p(T)

    仿射单元上 Jacobi 行列式为常数，物理投影等于复合函数在参考单元上的投影
    """
    if isinstance(f, PolyField):
        kind = f.kind
        amap = f.amap
        default_degree = min(f.degree + p, 12)
    else:
        kind = kind or FieldKind.SCALAR
        default_degree = VOLUME_QUAD_DEGREE
    rule = quadrature(quad_degree if quad_degree is not None else default_degree)
    basis = ScalarBasis(p)
    phi = basis.eval(rule.points)  # (npts, dim)
    vals = _sample(f, kind, rule.points, amap)
    # c_k = ∫_T̂ f φ_k
    moments = np.einsum("q,...qc,qk->...ck", rule.weights, vals, phi)
    coeffs = np.einsum("...ck,mk->...cm", moments, basis.coefficients)
    return PolyField(kind, p, coeffs, amap)


def integrate(values: np.ndarray, weights: np.ndarray, jacobian: float = 1.0) -> np.ndarray:
    """积分点值 (..., npts) 的加权和乘 |J|"""
    return jacobian * np.tensordot(values, weights, axes=([-1], [0]))


def l2_inner(f: PolyField, g: PolyField, quad_degree: Optional[int] = None) -> np.ndarray:
    """物理单元上的 L2 内积，张量场使用完整缩并（xy 分量计两次）"""
    degree = quad_degree if quad_degree is not None else min(f.degree + g.degree, 12)
    rule = quadrature(degree)
    jac = 1.0 if f.amap is None else f.amap.J
    if f.kind is FieldKind.TENSOR:
        fv, gv = f.tensor_values(rule.points), g.tensor_values(rule.points)
        prod = np.einsum("...qij,...qij->...q", fv, gv)
    else:
        prod = np.einsum("...qc,...qc->...q", f.eval(rule.points), g.eval(rule.points))
    return integrate(prod, rule.weights, jac)


def cell_integral(f: PolyField) -> np.ndarray:
    """∫_T f，返回 (*batch, ncomp)"""
    rule = quadrature(min(f.degree, 12))
    jac = 1.0 if f.amap is None else f.amap.J
    return jac * np.einsum("q,...qc->...c", rule.weights, f.eval(rule.points))
