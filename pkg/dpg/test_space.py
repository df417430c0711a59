"""
单元测试空间：推前的正交基与测试内积

theta 格式：z ∈ P³，Ξ ∈ P^{4,s}，τ ∈ P³²，内积
    (z,δz) + (ε∇z,ε∇δz) + (Ξ,δΞ) + (DivΞ−τ, DivδΞ−δτ) + (div τ, div δτ)
plain 格式：z ∈ P³，Θ ∈ P^{k,s}，内积
    (z,δz) + (ε∇z,ε∇δz) + (Θ,δΘ) + (divDivΘ, divDivδΘ)
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from dpg.scheme import Scheme
from mesh.triangulation import AffineMap
from poly.basis import ScalarBasis, SymTensorBasis, VectorBasis
from poly.fields import FieldKind, PolyField
from poly.quadrature import quadrature
from transforms.piola import push_scalar, push_tensor, push_vector

Z_DEGREE = 3
TAU_DEGREE = 3


def field_gram(f: PolyField, g: PolyField, quad_degree: Optional[int] = None) -> np.ndarray:
    """两个一维批量场在物理单元上的 L2 Gram 矩阵 (len f, len g)，张量用完整缩并"""
    if f.kind is not g.kind:
        raise ValueError("Gram 矩阵需要同类型的场")
    degree = quad_degree if quad_degree is not None else min(f.degree + g.degree, 12)
    rule = quadrature(max(degree, 0))
    jac = 1.0 if f.amap is None else f.amap.J
    if f.kind is FieldKind.TENSOR:
        fv = f.tensor_values(rule.points).reshape(len(f), rule.size, 4)
        gv = g.tensor_values(rule.points).reshape(len(g), rule.size, 4)
    else:
        fv, gv = f.eval(rule.points), g.eval(rule.points)
    return jac * np.einsum("q,aqc,bqc->ab", rule.weights, fv, gv)


def h2_gram(z: PolyField, w: PolyField) -> np.ndarray:
    """(z,w) + (ε∇z, ε∇w)"""
    return field_gram(z, w) + field_gram(z.hessian(), w.hessian())


def divdiv_vector_gram(xi: PolyField, tau: PolyField, xi2: PolyField, tau2: PolyField) -> np.ndarray:
    """(Ξ,δΞ) + (DivΞ−τ, DivδΞ−δτ) + (div τ, div δτ)，Ξ 与 τ 批量维需一致"""
    shear = xi.div_rows() - tau
    shear2 = xi2.div_rows() - tau2
    return field_gram(xi, xi2) + field_gram(shear, shear2) + field_gram(tau.div(), tau2.div())


def divdiv_gram(theta: PolyField, theta2: PolyField) -> np.ndarray:
    """(Θ,δΘ) + (divDivΘ, divDivδΘ)"""
    return field_gram(theta, theta2) + field_gram(theta.divdiv(), theta2.divdiv())


def _single(f: PolyField) -> PolyField:
    return f if f.batch_shape else f.with_coeffs(f.coeffs[None])


def h2_norm(z: PolyField) -> float:
    return float(np.sqrt(h2_gram(_single(z), _single(z))[0, 0]))


def divdiv_vector_norm(xi: PolyField, tau: PolyField) -> float:
    return float(np.sqrt(divdiv_vector_gram(_single(xi), _single(tau), _single(xi), _single(tau))[0, 0]))


def divdiv_norm(theta: PolyField) -> float:
    return float(np.sqrt(divdiv_gram(_single(theta), _single(theta))[0, 0]))


@dataclass(frozen=True, eq=False)
class LocalTestSpace:
    """单元 T 上的离散测试空间，基函数为参考正交基经相应变换推前"""

    scheme: Scheme
    amap: AffineMap

    @cached_property
    def z(self) -> PolyField:
        return push_scalar(self.amap, ScalarBasis(Z_DEGREE).as_field())

    @cached_property
    def xi(self) -> PolyField:
        """theta 格式的 Ξ 或 plain 格式的 Θ"""
        return push_tensor(self.amap, SymTensorBasis(self.scheme.tensor_degree).as_field())

    @cached_property
    def tau(self) -> Optional[PolyField]:
        if not self.scheme.has_theta:
            return None
        return push_vector(self.amap, VectorBasis(TAU_DEGREE).as_field())

    @property
    def dims(self) -> Tuple[int, ...]:
        dims = (len(self.z), len(self.xi))
        return dims + (len(self.tau),) if self.tau is not None else dims

    @property
    def dim(self) -> int:
        return sum(self.dims)

    @property
    def blocks(self) -> Tuple[slice, ...]:
        offsets = np.cumsum((0,) + self.dims)
        return tuple(slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:]))

    def zero_tensors(self, n: int) -> PolyField:
        return PolyField.zeros(FieldKind.TENSOR, 0, (n,), self.amap)

    def zero_vectors(self, n: int) -> PolyField:
        return PolyField.zeros(FieldKind.VECTOR, 0, (n,), self.amap)

    def gram(self) -> np.ndarray:
        """测试内积下的 Gram 矩阵"""
        g_z = h2_gram(self.z, self.z)
        if not self.scheme.has_theta:
            return block_diag(g_z, divdiv_gram(self.xi, self.xi))
        n_xi, n_tau = len(self.xi), len(self.tau)
        xi_full = concat_fields(self.xi, self.zero_tensors(n_tau))
        tau_full = concat_fields(self.zero_vectors(n_xi), self.tau)
        return block_diag(g_z, divdiv_vector_gram(xi_full, tau_full, xi_full, tau_full))


def concat_fields(a: PolyField, b: PolyField) -> PolyField:
    """沿批量维拼接两个同类型场"""
    p = max(a.degree, b.degree)
    coeffs = np.concatenate([a.with_degree(p).coeffs, b.with_degree(p).coeffs], axis=0)
    return PolyField(a.kind, p, coeffs, a.amap)