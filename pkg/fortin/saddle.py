"""
参考单元上的约束最小化

min ½ xᵀ A x − gᵀ x  s.t.  Cᵀ x = c，KKT 系统
    [A  C ] [x]   [g]
    [Cᵀ 0 ] [λ] = [c]
用对称不定分解（Bunch-Kaufman）稠密求解
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, solve, svdvals

from config import RANK_TOLERANCE
from utils.error_handler import CertificationError


@dataclass(eq=False)
class SaddleSystem:
    """A 为离散空间上的测试内积 Gram 矩阵，C 的列为约束泛函在基上的取值"""
    name: str
    A: np.ndarray
    C: np.ndarray
    _kkt: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.A.shape[0] != self.C.shape[0]:
            raise ValueError(f"{self.name}: A 为 {self.A.shape}，C 为 {self.C.shape}")

    @property
    def shape(self):
        return self.C.shape

    @property
    def n_trial(self) -> int:
        return self.C.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.C.shape[1]

    def smallest_singular_value(self) -> float:
        return float(svdvals(self.C)[-1])

    def check_rank(self, tol: float = RANK_TOLERANCE) -> float:
        sigma = self.smallest_singular_value()
        if not sigma > tol:
            raise CertificationError(
                f"{self.name} 约束块 {self.shape[0]}×{self.shape[1]} 不满列秩: σ_min = {sigma:.3e}",
                block=self.name,
            )
        return sigma

    @property
    def kkt(self) -> np.ndarray:
        if self._kkt is None:
            n, m = self.C.shape
            K = np.zeros((n + m, n + m))
            K[:n, :n] = 0.5 * (self.A + self.A.T)
            K[:n, n:] = self.C
            K[n:, :n] = self.C.T
            self._kkt = K
        return self._kkt

    def solve(self, g: np.ndarray, c: np.ndarray) -> np.ndarray:
        """g 形状 (n, k)，c 形状 (m, k)，返回 x (n, k)"""
        rhs = np.vstack([np.atleast_2d(g.T).T, np.atleast_2d(c.T).T])
        try:
            sol = solve(self.kkt, rhs, assume_a="sym")
        except LinAlgError as e:
            raise CertificationError(f"{self.name} 鞍点系统分解失败: {e}", block=self.name) from e
        if not np.all(np.isfinite(sol)):
            raise CertificationError(f"{self.name} 鞍点解含非有限值", block=self.name)
        return sol[:self.n_trial]
