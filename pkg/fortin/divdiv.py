"""
H(Div,div) 与 H(divDiv) 上的 Fortin 算子

参考单元上在离散测试空间中求约束最小化问题：
- (Ξ*, τ*) ∈ P^{4,s} × P³²：与 12 个 P^{3,2} 迹的边界配对、与常对称张量的体积矩、
  与 P³² 中 θ 的 (θ, DivΞ − τ) 保持不变（65 个未知量，35 个约束）
- Q* ∈ P^{4,s}：与 12 个迹的边界配对、与常对称张量的体积矩保持不变（45 × 15）
distance 模式最小化 ‖Π v − v‖_V，离散输入原样返回；norm 模式最小化 ‖Π v‖_V。
物理单元上先回拉到参考单元，再推前
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from config import FORTIN_MODE
from dpg.scheme import VOIGT_WEIGHT
from dpg.test_space import TAU_DEGREE, concat_fields, divdiv_gram, divdiv_vector_gram, field_gram
from fortin.saddle import SaddleSystem
from mesh.triangulation import AffineMap
from poly.basis import SymTensorBasis, VectorBasis
from poly.fields import FieldKind, PolyField
from poly.projection import cell_integral
from traces.deflection import uhat_divdiv_pairing_matrix, uhat_pairing_matrix
from transforms.piola import pull_tensor, pull_vector, push_tensor, push_vector
from utils.logger import logger

XI_DEGREE = 4
MODES = ("distance", "norm")
REFERENCE_MAP = AffineMap.identity()


def _batched(f: PolyField) -> PolyField:
    return f if f.batch_shape else f.with_coeffs(f.coeffs[None])


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"未知 Fortin 模式 {mode}，可选 {MODES}")
    return mode


def _corrupted(C: np.ndarray) -> np.ndarray:
    """测试钩子：最后一个约束复制第一个，使 C 秩亏"""
    C = C.copy()
    C[:, -1] = C[:, 0]
    return C


# ----------------------------------------------------------------------
# 约束泛函（输入为参考单元上的一维批量场）
# ----------------------------------------------------------------------
def divdiv_vector_constraints(xi: PolyField, tau: PolyField) -> np.ndarray:
    """(n, 35)：边界配对 12 + 体积矩 3 + 剪力矩 20"""
    pairing = uhat_pairing_matrix(REFERENCE_MAP, xi, tau, enriched=True)
    volume = cell_integral(xi) @ VOIGT_WEIGHT
    shear = field_gram(xi.div_rows() - tau, VectorBasis(TAU_DEGREE).as_field())
    return np.hstack([pairing, volume, shear])


def ddiv_constraints(theta: PolyField) -> np.ndarray:
    """(n, 15)：边界配对 12 + 体积矩 3"""
    pairing = uhat_divdiv_pairing_matrix(REFERENCE_MAP, theta, enriched=True)
    volume = cell_integral(theta) @ VOIGT_WEIGHT
    return np.hstack([pairing, volume])


# ----------------------------------------------------------------------
# 参考算子
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class DivDivVectorOperator:
    system: SaddleSystem
    xi_trial: PolyField
    tau_trial: PolyField

    def __call__(self, xi_hat: PolyField, tau_hat: PolyField,
                 mode: str = FORTIN_MODE) -> Tuple[PolyField, PolyField]:
        _check_mode(mode)
        xi_b, tau_b = _batched(xi_hat), _batched(tau_hat)
        c = divdiv_vector_constraints(xi_b, tau_b).T
        if mode == "distance":
            g = divdiv_vector_gram(self.xi_trial, self.tau_trial, xi_b, tau_b)
        else:
            g = np.zeros((self.system.n_trial, len(xi_b)))
        x = self.system.solve(g, c).T
        xi_star, tau_star = self.xi_trial.combine(x), self.tau_trial.combine(x)
        if not xi_hat.batch_shape:
            return xi_star[0], tau_star[0]
        return xi_star, tau_star


@dataclass(frozen=True, eq=False)
class DDivOperator:
    system: SaddleSystem
    trial: PolyField

    def __call__(self, theta_hat: PolyField, mode: str = FORTIN_MODE) -> PolyField:
        _check_mode(mode)
        theta_b = _batched(theta_hat)
        c = ddiv_constraints(theta_b).T
        if mode == "distance":
            g = divdiv_gram(self.trial, theta_b)
        else:
            g = np.zeros((self.system.n_trial, len(theta_b)))
        star = self.trial.combine(self.system.solve(g, c).T)
        return star if theta_hat.batch_shape else star[0]


@lru_cache(maxsize=None)
def divdiv_vector_operator(corrupt: bool = False) -> DivDivVectorOperator:
    xi_basis = SymTensorBasis(XI_DEGREE).as_field()
    tau_basis = VectorBasis(TAU_DEGREE).as_field()
    n_xi, n_tau = len(xi_basis), len(tau_basis)
    xi_trial = concat_fields(xi_basis, PolyField.zeros(FieldKind.TENSOR, 0, (n_tau,)))
    tau_trial = concat_fields(PolyField.zeros(FieldKind.VECTOR, 0, (n_xi,)), tau_basis)

    A = divdiv_vector_gram(xi_trial, tau_trial, xi_trial, tau_trial)
    C = divdiv_vector_constraints(xi_trial, tau_trial)
    if corrupt:
        C = _corrupted(C)
    system = SaddleSystem("divdiv_vector", A, C)
    logger.debug(f"divdiv_vector 鞍点系统: A {A.shape}, C {C.shape}")
    return DivDivVectorOperator(system, xi_trial, tau_trial)


@lru_cache(maxsize=None)
def ddiv_operator(corrupt: bool = False) -> DDivOperator:
    trial = SymTensorBasis(XI_DEGREE).as_field()
    A = divdiv_gram(trial, trial)
    C = ddiv_constraints(trial)
    if corrupt:
        C = _corrupted(C)
    logger.debug(f"ddiv 鞍点系统: A {A.shape}, C {C.shape}")
    return DDivOperator(SaddleSystem("ddiv", A, C), trial)


# ----------------------------------------------------------------------
# 物理单元
# ----------------------------------------------------------------------
def _element_map(field: PolyField, amap: AffineMap = None) -> AffineMap:
    return amap or field.amap or REFERENCE_MAP


def fortin_divdiv_vector(xi: PolyField, tau: PolyField, amap: AffineMap = None,
                         mode: str = FORTIN_MODE) -> Tuple[PolyField, PolyField]:
    """Π(Ξ, τ) = ℋ_T(Π̂(Ξ̂, τ̂))"""
    amap = _element_map(xi, amap)
    xi_hat = pull_tensor(xi.with_map(amap))
    tau_hat = pull_vector(tau.with_map(amap))
    xi_star, tau_star = divdiv_vector_operator()(xi_hat, tau_hat, mode)
    return push_tensor(amap, xi_star), push_vector(amap, tau_star)


def fortin_ddiv(theta: PolyField, amap: AffineMap = None, mode: str = FORTIN_MODE) -> PolyField:
    """Π Q = 𝒫_T(Π̂ Q̂)"""
    amap = _element_map(theta, amap)
    star = ddiv_operator()(pull_tensor(theta.with_map(amap)), mode)
    return push_tensor(amap, star)
