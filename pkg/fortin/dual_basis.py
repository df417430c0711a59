"""
Q̂ 对偶泛函的对偶基

η₁..₃ 为重心坐标，η₄ = η₁η₂、η₅ = η₂η₃、η₆ = η₃η₁ 对应三条边，
η_b = η₁η₂η₃，η₇..₉ = η_{4..6}(η_{k+1} − η_k) + η_b。
矩阵 A 的行对应函数 η_j、列对应泛函 q_k，A = [[A₁, A₂], [0, A₃]]，A₁ 为上三角。
χ_k = Σ_j (A⁻¹)_kj η_j 满足 q_i(χ_k) = δ_ik
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from mesh.triangulation import AffineMap
from poly.fields import FieldKind, PolyField
from poly.projection import l2_project
from traces.moment import qhat_functionals
from transforms.piola import push_scalar
from utils.error_handler import CertificationError
from utils.logger import logger

DET_TOLERANCE = 1e-6


def _barycentric(points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(points)
    return np.column_stack([1.0 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])


def _eta_values(points: np.ndarray) -> np.ndarray:
    """九个 η 在参考点上的值 (npts, 9)"""
    lam = _barycentric(points)
    l1, l2, l3 = lam[:, 0], lam[:, 1], lam[:, 2]
    bubble = l1 * l2 * l3
    e4, e5, e6 = l1 * l2, l2 * l3, l3 * l1
    return np.column_stack([
        l1, l2, l3, e4, e5, e6,
        e4 * (l2 - l1) + bubble,
        e5 * (l3 - l2) + bubble,
        e6 * (l1 - l3) + bubble,
    ])


@lru_cache(maxsize=1)
def reference_eta() -> PolyField:
    """η₁..₉ 的参考单项式系数（三次多项式的 L2 投影是精确的）"""
    fields = [
        l2_project(lambda pts, j=j: _eta_values(pts)[:, j], 3, quad_degree=6)
        for j in range(9)
    ]
    coeffs = np.stack([f.coeffs for f in fields], axis=0)
    return PolyField(FieldKind.SCALAR, 3, coeffs)


@dataclass(frozen=True, eq=False)
class DualBasisGG:
    """单元上的 η、矩阵 A 与对偶基 χ"""
    amap: AffineMap
    eta: PolyField
    A: np.ndarray
    chi: PolyField

    @property
    def A1(self) -> np.ndarray:
        return self.A[:6, :6]

    @property
    def A2(self) -> np.ndarray:
        return self.A[:6, 6:]

    @property
    def A3(self) -> np.ndarray:
        return self.A[6:, 6:]

    @property
    def lower_block(self) -> np.ndarray:
        return self.A[6:, :6]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.A))

    def triangular_defect(self) -> float:
        """A₁ 严格下三角部分与左下零块的最大模"""
        lower = np.tril(self.A1, k=-1)
        return float(max(np.max(np.abs(lower)), np.max(np.abs(self.lower_block))))

    def duality_residual(self) -> float:
        """max |q_i(χ_k) − δ_ik|"""
        Q = qhat_functionals(self.amap, self.chi)  # (k, i)
        return float(np.max(np.abs(Q - np.eye(9))))

    def interpolate(self, functionals: np.ndarray) -> PolyField:
        """Σ_k c_k χ_k，c 的最后一维为 9"""
        return self.chi.combine(functionals)


def build_dual_basis(amap: AffineMap, corrupt: bool = False) -> DualBasisGG:
    """在给定单元上用该单元自身的泛函构造对偶基"""
    eta = push_scalar(amap, reference_eta())
    if corrupt:
        # 测试钩子：让 η₉ 与 η₈ 重合
        coeffs = eta.coeffs.copy()
        coeffs[8] = coeffs[7]
        eta = eta.with_coeffs(coeffs)
    A = qhat_functionals(amap, eta)  # 行 η_j，列 q_k
    det = float(np.linalg.det(A))
    if not np.isfinite(det) or abs(det) < DET_TOLERANCE:
        raise CertificationError(f"对偶基矩阵奇异: |det A| = {abs(det):.3e}", block="dual_basis")
    chi = eta.combine(np.linalg.inv(A))
    return DualBasisGG(amap=amap, eta=eta, A=A, chi=chi)


@lru_cache(maxsize=1)
def build_dual_basis_gg() -> DualBasisGG:
    """参考单元上的对偶基，系数与网格无关"""
    dual = build_dual_basis(AffineMap.identity())
    logger.debug(f"参考对偶基: det A = {dual.det:.6e}, det A₃ = {np.linalg.det(dual.A3):.6e}")
    return dual
