"""
参考单元与物理单元之间的函数变换

场以复合 f∘F_T 的参考单项式系数存储，因此三种变换都是系数层面的精确线性映射：
- pullback:        z∘F = ẑ
- Piola:           |J| τ∘F = B τ̂
- Piola-Kirchhoff: |J| M∘F = B M̂ Bᵀ
"""
from enum import Enum

import numpy as np

from mesh.triangulation import AffineMap
from poly.fields import FieldKind, PolyField
from utils.error_handler import DegenerateElementError


class TransformKind(str, Enum):
    PULLBACK = "pullback"
    PIOLA = "piola"
    PIOLA_KIRCHHOFF = "piola_kirchhoff"


KIND_OF_FIELD = {
    FieldKind.SCALAR: TransformKind.PULLBACK,
    FieldKind.VECTOR: TransformKind.PIOLA,
    FieldKind.TENSOR: TransformKind.PIOLA_KIRCHHOFF,
}


def _check_map(amap: AffineMap) -> None:
    if amap.J <= 0:
        raise DegenerateElementError(f"变换要求 J > 0，当前 J={amap.J:.3e}（反射或退化映射）")


def _check_kind(field: PolyField, kind: FieldKind) -> None:
    if field.kind is not kind:
        raise ValueError(f"期望 {kind.value} 场，得到 {field.kind.value}")


def _tensor_congruence(coeffs: np.ndarray, A: np.ndarray, scale: float) -> np.ndarray:
    """系数层面的 scale · A Θ Aᵀ，Θ 按 (xx, yy, xy) 存储"""
    xx, yy, xy = coeffs[..., 0, :], coeffs[..., 1, :], coeffs[..., 2, :]
    full = np.stack([np.stack([xx, xy], axis=-2), np.stack([xy, yy], axis=-2)], axis=-3)  # (..., 2, 2, m)
    out = scale * np.einsum("ia,...abm,jb->...ijm", A, full, A)
    return np.stack([out[..., 0, 0, :], out[..., 1, 1, :], 0.5 * (out[..., 0, 1, :] + out[..., 1, 0, :])], axis=-2)


def push_scalar(amap: AffineMap, z_hat: PolyField) -> PolyField:
    _check_map(amap)
    _check_kind(z_hat, FieldKind.SCALAR)
    return z_hat.with_map(amap)


def push_vector(amap: AffineMap, tau_hat: PolyField) -> PolyField:
    _check_map(amap)
    _check_kind(tau_hat, FieldKind.VECTOR)
    coeffs = np.einsum("ia,...am->...im", amap.B, tau_hat.coeffs) / amap.J
    return PolyField(FieldKind.VECTOR, tau_hat.degree, coeffs, amap)


def push_tensor(amap: AffineMap, m_hat: PolyField) -> PolyField:
    _check_map(amap)
    _check_kind(m_hat, FieldKind.TENSOR)
    coeffs = _tensor_congruence(m_hat.coeffs, amap.B, 1.0 / amap.J)
    return PolyField(FieldKind.TENSOR, m_hat.degree, coeffs, amap)


def _source_map(field: PolyField, amap: AffineMap = None) -> AffineMap:
    amap = amap or field.amap
    if amap is None:
        raise ValueError("回拉需要物理单元上的场（缺少仿射映射）")
    _check_map(amap)
    return amap


def pull_scalar(z: PolyField, amap: AffineMap = None) -> PolyField:
    amap = _source_map(z, amap)
    _check_kind(z, FieldKind.SCALAR)
    return z.with_map(None)


def pull_vector(tau: PolyField, amap: AffineMap = None) -> PolyField:
    amap = _source_map(tau, amap)
    _check_kind(tau, FieldKind.VECTOR)
    coeffs = amap.J * np.einsum("ia,...am->...im", amap.B_inv, tau.coeffs)
    return PolyField(FieldKind.VECTOR, tau.degree, coeffs, None)


def pull_tensor(m: PolyField, amap: AffineMap = None) -> PolyField:
    amap = _source_map(m, amap)
    _check_kind(m, FieldKind.TENSOR)
    coeffs = _tensor_congruence(m.coeffs, amap.B_inv, amap.J)
    return PolyField(FieldKind.TENSOR, m.degree, coeffs, None)


def push(amap: AffineMap, field: PolyField) -> PolyField:
    """按场类型选择对应变换"""
    return {FieldKind.SCALAR: push_scalar, FieldKind.VECTOR: push_vector,
            FieldKind.TENSOR: push_tensor}[field.kind](amap, field)


def pull(field: PolyField, amap: AffineMap = None) -> PolyField:
    return {FieldKind.SCALAR: pull_scalar, FieldKind.VECTOR: pull_vector,
            FieldKind.TENSOR: pull_tensor}[field.kind](field, amap)
