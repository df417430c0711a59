"""
单元级 DPG 矩阵：Gram 矩阵 G、耦合矩阵 B、载荷向量 l

B 的行对应测试基函数，列对应局部试探自由度（见 Scheme.trial_layout）。
双线性形式
    b = (u, div τ) + (θ, τ − DivΞ) + (M, ℂ⁻¹Ξ + ε∇z) − ⟨û, (Ξ, τ)⟩ + ⟨q̂, z⟩
plain 格式
    b = (u, divDivΘ) + (M, ℂ⁻¹Θ + ε∇z) − ⟨û, Θ⟩ + ⟨q̂, z⟩
载荷 L(z) = −(f, z)
"""
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from config import VOLUME_QUAD_DEGREE
from dpg.scheme import VOIGT_WEIGHT, Scheme
from dpg.test_space import LocalTestSpace
from mesh.triangulation import AffineMap
from poly.fields import FieldKind, PolyField
from poly.projection import cell_integral
from poly.quadrature import quadrature
from traces.deflection import uhat_divdiv_pairing_matrix, uhat_pairing_matrix
from traces.moment import qhat_functionals
from utils.error_handler import AssemblyError

LoadLike = Union[None, PolyField, Callable[[np.ndarray], np.ndarray]]


# ----------------------------------------------------------------------
# 按测试函数类型生成 B 的行；测试场既可以是基也可以是任意（批量）场
# ----------------------------------------------------------------------
def b_rows_z(scheme: Scheme, amap: AffineMap, z: PolyField) -> np.ndarray:
    """z 行：(M, ε∇z) + ⟨q̂, z⟩"""
    layout = scheme.trial_layout
    rows = np.zeros(z.batch_shape + (scheme.n_trial,))
    # M 取 Voigt 单位张量，e_xy 的完整缩并计两次
    rows[..., layout["M"]] = cell_integral(z.hessian()) @ VOIGT_WEIGHT
    rows[..., layout["qhat"]] = qhat_functionals(amap, z)
    return rows


def b_rows_xi(scheme: Scheme, amap: AffineMap, xi: PolyField) -> np.ndarray:
    """Ξ 行（τ = 0）：−(θ, DivΞ) + (ℂ⁻¹M, Ξ) − ⟨û, (Ξ, 0)⟩"""
    layout = scheme.trial_layout
    rows = np.zeros(xi.batch_shape + (scheme.n_trial,))
    rows[..., layout["theta"]] = -cell_integral(xi.div_rows())
    rows[..., layout["M"]] = cell_integral(xi) @ (VOIGT_WEIGHT @ scheme.material.inverse)
    zero_tau = PolyField.zeros(FieldKind.VECTOR, 0, xi.batch_shape, amap)
    rows[..., layout["uhat"]] = -uhat_pairing_matrix(amap, xi, zero_tau)
    return rows


def b_rows_tau(scheme: Scheme, amap: AffineMap, tau: PolyField) -> np.ndarray:
    """τ 行（Ξ = 0）：(u, div τ) + (θ, τ) − ⟨û, (0, τ)⟩"""
    layout = scheme.trial_layout
    rows = np.zeros(tau.batch_shape + (scheme.n_trial,))
    rows[..., layout["u"]] = cell_integral(tau.div())
    rows[..., layout["theta"]] = cell_integral(tau)
    zero_xi = PolyField.zeros(FieldKind.TENSOR, 0, tau.batch_shape, amap)
    rows[..., layout["uhat"]] = -uhat_pairing_matrix(amap, zero_xi, tau)
    return rows


def b_rows_theta(scheme: Scheme, amap: AffineMap, theta: PolyField) -> np.ndarray:
    """plain 格式 Θ 行：(u, divDivΘ) + (ℂ⁻¹M, Θ) − ⟨û, Θ⟩"""
    layout = scheme.trial_layout
    rows = np.zeros(theta.batch_shape + (scheme.n_trial,))
    rows[..., layout["u"]] = cell_integral(theta.divdiv())
    rows[..., layout["M"]] = cell_integral(theta) @ (VOIGT_WEIGHT @ scheme.material.inverse)
    rows[..., layout["uhat"]] = -uhat_divdiv_pairing_matrix(amap, theta)
    return rows


# ----------------------------------------------------------------------
# 单元矩阵
# ----------------------------------------------------------------------
def local_gram(amap: AffineMap, scheme: Scheme) -> np.ndarray:
    return LocalTestSpace(scheme, amap).gram()


def local_b(amap: AffineMap, scheme: Scheme) -> np.ndarray:
    space = LocalTestSpace(scheme, amap)
    if scheme.has_theta:
        return np.vstack([b_rows_z(scheme, amap, space.z),
                          b_rows_xi(scheme, amap, space.xi),
                          b_rows_tau(scheme, amap, space.tau)])
    return np.vstack([b_rows_z(scheme, amap, space.z), b_rows_theta(scheme, amap, space.xi)])


def load_values(f: LoadLike, amap: AffineMap, ref_points: np.ndarray) -> np.ndarray:
    """载荷在物理单元积分点上的值"""
    if f is None:
        return np.zeros(len(ref_points))
    phys = amap.to_physical(ref_points)
    if isinstance(f, PolyField):
        return f.eval_physical(phys)
    return np.asarray(f(phys), dtype=float).reshape(len(ref_points))


def local_load(amap: AffineMap, scheme: Scheme, f: LoadLike) -> np.ndarray:
    """l_i = −∫_T f z_i，Ξ、τ 分量为零"""
    space = LocalTestSpace(scheme, amap)
    rule = quadrature(VOLUME_QUAD_DEGREE)
    l = np.zeros(space.dim)
    fv = load_values(f, amap, rule.points)
    l[space.blocks[0]] = -amap.J * space.z.values(rule.points) @ (rule.weights * fv)
    return l


@dataclass
class LocalDpgSystem:
    """单元上的 (G, B, l) 以及 Jacobi 缩放后的 Cholesky 分解"""
    G: np.ndarray
    B: np.ndarray
    l: np.ndarray
    element: int = -1
    scaling: Optional[np.ndarray] = None
    factor: Optional[tuple] = None
    condition: float = float("nan")

    @classmethod
    def build(cls, amap: AffineMap, scheme: Scheme, f: LoadLike = None, element: int = -1) -> "LocalDpgSystem":
        system = cls(local_gram(amap, scheme), local_b(amap, scheme), local_load(amap, scheme, f), element)
        system.factorize()
        return system

    def factorize(self) -> None:
        diag = np.diag(self.G)
        if np.any(diag <= 0) or not np.all(np.isfinite(self.G)):
            raise AssemblyError(f"单元 {self.element} 的 Gram 矩阵对角元非正", element=self.element)
        s = 1.0 / np.sqrt(diag)
        scaled = s[:, None] * self.G * s[None, :]
        try:
            self.factor = cho_factor(scaled, lower=True)
        except LinAlgError as e:
            raise AssemblyError(f"单元 {self.element} 的 Gram 矩阵 Cholesky 分解失败: {e}",
                                element=self.element) from e
        self.scaling = s
        self.condition = float(np.linalg.cond(scaled))

    def solve_gram(self, rhs: np.ndarray) -> np.ndarray:
        """G⁻¹ rhs"""
        if self.factor is None:
            self.factorize()
        s = self.scaling
        rhs = np.asarray(rhs, dtype=float)
        scale = s if rhs.ndim == 1 else s[:, None]
        return scale * cho_solve(self.factor, scale * rhs)

    def normal_matrix(self) -> np.ndarray:
        """Bᵀ G⁻¹ B（显式对称化）"""
        N = self.B.T @ self.solve_gram(self.B)
        return 0.5 * (N + N.T)

    def normal_rhs(self) -> np.ndarray:
        """Bᵀ G⁻¹ l"""
        return self.B.T @ self.solve_gram(self.l)

    def residual_norm2(self, x_local: np.ndarray) -> float:
        """η(T)² = rᵀ G⁻¹ r，r = l − B x"""
        r = self.l - self.B @ x_local
        return float(max(r @ self.solve_gram(r), 0.0))
