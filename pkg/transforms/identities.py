"""
变换恒等式的数值残差

所有检查都在参考积分点上比较两侧，返回最大绝对残差
"""
from dataclasses import dataclass
from typing import Dict

import numpy as np

from config import VOLUME_QUAD_DEGREE, EDGE_QUAD_DEGREE
from mesh.triangulation import AffineMap, edge_frames, reference_edge_points, REFERENCE_VERTICES
from poly.fields import PolyField
from poly.projection import l2_inner
from poly.quadrature import quadrature, edge_quadrature
from transforms.piola import push_scalar, push_tensor, push_vector


@dataclass
class IdentityResiduals:
    """各恒等式的最大残差"""
    values: Dict[str, float]

    @property
    def max(self) -> float:
        return max(self.values.values(), default=0.0)

    def to_dict(self) -> Dict[str, float]:
        return dict(self.values)


def _contract(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...ij->...", a, b)


def _boundary_divdiv_pairing(m: PolyField, z: PolyField, amap) -> float:
    """∮(n·Div M) z − ∮(M n)·∇z，amap 为 None 时在参考单元上计算"""
    rule = edge_quadrature(EDGE_QUAD_DEGREE)
    geometry = amap if amap is not None else AffineMap.from_vertices(REFERENCE_VERTICES)
    div_m, grad_z = m.div_rows(), z.grad()
    total = 0.0
    for k, frame in enumerate(edge_frames(geometry)):
        pts = reference_edge_points(k, rule.points)
        n = frame.normal
        term = (div_m.eval(pts) @ n) * z.values(pts) - np.einsum("qij,j,qi->q", m.tensor_values(pts), n, grad_z.eval(pts))
        total += frame.length * float(rule.weights @ term)
    return total


def verify_divdiv_identity(amap: AffineMap, m_hat: PolyField, z_hat: PolyField) -> IdentityResiduals:
    """|J|(divDiv M)∘F = d̂ivD̂iv M̂、|J|(ε∇z:M)∘F = Ĥess ẑ:M̂ 以及迹配对相等"""
    rule = quadrature(VOLUME_QUAD_DEGREE)
    pts = rule.points
    m = push_tensor(amap, m_hat)
    z = push_scalar(amap, z_hat)

    dd_phys = amap.J * m.divdiv().values(pts)
    dd_ref = m_hat.divdiv().values(pts)

    hz_phys = amap.J * _contract(z.hessian().tensor_values(pts), m.tensor_values(pts))
    hz_ref = _contract(z_hat.hessian().tensor_values(pts), m_hat.tensor_values(pts))

    vol_phys = amap.J * float(rule.weights @ (m.divdiv().values(pts) * z.values(pts)
                                              - _contract(m.tensor_values(pts), z.hessian().tensor_values(pts))))
    vol_ref = float(rule.weights @ (dd_ref * z_hat.values(pts) - hz_ref))
    bnd_phys = _boundary_divdiv_pairing(m, z, amap)
    bnd_ref = _boundary_divdiv_pairing(m_hat, z_hat, None)

    return IdentityResiduals({
        "divdiv": float(np.max(np.abs(dd_phys - dd_ref))),
        "hessian_contraction": float(np.max(np.abs(hz_phys - hz_ref))),
        "pairing_volume": abs(vol_phys - vol_ref),
        "pairing_boundary": abs(bnd_phys - bnd_ref),
        "pairing_volume_vs_boundary": abs(vol_phys - bnd_phys),
    })


def verify_divdiv_vector_identity(amap: AffineMap, xi_hat: PolyField, tau_hat: PolyField,
                                  u_hat: PolyField) -> IdentityResiduals:
    """|J|(DivΞ−τ)∘F = B(D̂ivΞ̂−τ̂)、|J|(div τ)∘F = d̂iv τ̂ 以及 ⟨t̃r u,(Ξ,τ)⟩ 的变换不变性"""
    rule = quadrature(VOLUME_QUAD_DEGREE)
    pts = rule.points
    xi = push_tensor(amap, xi_hat)
    tau = push_vector(amap, tau_hat)
    u = push_scalar(amap, u_hat)

    shear = xi.div_rows() - tau
    shear_hat = xi_hat.div_rows() - tau_hat
    shear_phys = amap.J * shear.eval(pts)
    shear_ref = shear_hat.eval(pts) @ amap.B.T

    div_phys = amap.J * tau.div().values(pts)
    div_ref = tau_hat.div().values(pts)

    dot_phys = amap.J * np.einsum("qi,qi->q", u.grad().eval(pts), shear.eval(pts))
    dot_ref = np.einsum("qi,qi->q", u_hat.grad().eval(pts), shear_hat.eval(pts))

    def volume_form(x: PolyField, t: PolyField, v: PolyField, jac: float) -> float:
        integrand = (t.div().values(pts) * v.values(pts)
                     + np.einsum("qi,qi->q", (t - x.div_rows()).eval(pts), v.grad().eval(pts))
                     - _contract(x.tensor_values(pts), v.hessian().tensor_values(pts)))
        return jac * float(rule.weights @ integrand)

    pair_phys = volume_form(xi, tau, u, amap.J)
    pair_ref = volume_form(xi_hat, tau_hat, u_hat, 1.0)

    return IdentityResiduals({
        "shear": float(np.max(np.abs(shear_phys - shear_ref))),
        "div": float(np.max(np.abs(div_phys - div_ref))),
        "gradient_shear": float(np.max(np.abs(dot_phys - dot_ref))),
        "pairing": abs(pair_phys - pair_ref),
    })


def norm_scaling_ratios(amap: AffineMap, m_hat: PolyField, tau_hat: PolyField) -> Dict[str, float]:
    """相似映射 B = h·I 下的范数比值，理论上全部为 1

    ‖M‖_T = h‖M̂‖, ‖divDiv M‖_T = h⁻¹‖d̂ivD̂iv M̂‖, ‖div τ‖_T = h⁻¹‖d̂iv τ̂‖
    """
    h = float(np.sqrt(amap.J))
    m = push_tensor(amap, m_hat)
    tau = push_vector(amap, tau_hat)

    def norm(f: PolyField) -> float:
        return float(np.sqrt(l2_inner(f, f)))

    return {
        "tensor": norm(m) / (h * norm(m_hat)),
        "divdiv": norm(m.divdiv()) * h / norm(m_hat.divdiv()),
        "div": norm(tau.div()) * h / norm(tau_hat.div()),
    }
