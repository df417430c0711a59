"""
H²(𝒯) 上的 Fortin 算子

Π z = Π₀(z − z_ker) + z_ker，z_ker 为 z 在 P¹ 上的 L2 投影，
Π₀ z = Σ_k q_k(z) χ_k 用单元自身的对偶基
"""
from typing import List, Sequence

from fortin.dual_basis import build_dual_basis
from mesh.triangulation import AffineMap, Mesh
from poly.fields import FieldKind, PolyField
from poly.projection import l2_project
from traces.moment import qhat_functionals


def fortin_ggrad_element(z: PolyField, amap: AffineMap = None) -> PolyField:
    """单元上的 Π z，z 可以是批量场，返回三次场"""
    if z.kind is not FieldKind.SCALAR:
        raise ValueError("Ggrad Fortin 算子只作用于标量场")
    amap = amap or z.amap
    if amap is None:
        raise ValueError("缺少单元仿射映射")
    z = z.with_map(amap)
    dual = build_dual_basis(amap)
    z_ker = l2_project(z, 1)
    pi0 = dual.interpolate(qhat_functionals(amap, z - z_ker))
    return pi0 + z_ker


def fortin_ggrad(pieces: Sequence[PolyField], mesh: Mesh) -> List[PolyField]:
    """分片多项式 z（每个单元一个复合系数场）逐单元作用 Π"""
    if len(pieces) != mesh.n_triangles:
        raise ValueError(f"分片数 {len(pieces)} 与单元数 {mesh.n_triangles} 不一致")
    return [fortin_ggrad_element(z, mesh.affine_map(t)) for t, z in enumerate(pieces)]
