"""
离散格式与材料张量
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict

import numpy as np

from config import MATERIAL_POISSON, PLAIN_TENSOR_DEGREE
from poly.fields import FieldKind, PolyField

# 张量内积 A:B = aᵀ W b（Voigt 存储，xy 分量计两次）
VOIGT_WEIGHT = np.diag([1.0, 1.0, 2.0])


class SchemeKind(str, Enum):
    """theta: 试探 (u, θ, M, û, q̂)，测试 (z, Ξ, τ)；plain: 试探 (u, M, û, q̂)，测试 (z, Θ)"""
    THETA = "theta"
    PLAIN = "plain"


@dataclass(frozen=True, eq=False)
class MaterialTensor:
    """作用在 (M_xx, M_yy, M_xy) 上的 3×3 矩阵，要求关于张量内积自伴且正定"""
    matrix: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.matrix, dtype=float).reshape(3, 3)
        WC = VOIGT_WEIGHT @ C
        if not np.allclose(WC, WC.T, atol=1e-13):
            raise ValueError("材料张量关于张量内积不自伴")
        if np.min(np.linalg.eigvalsh(0.5 * (WC + WC.T))) <= 0:
            raise ValueError("材料张量不正定")
        C.setflags(write=False)
        object.__setattr__(self, "matrix", C)

    @classmethod
    def identity(cls) -> "MaterialTensor":
        return cls(np.eye(3))

    @classmethod
    def isotropic(cls, nu: float) -> "MaterialTensor":
        """ℂε = (1−ν)ε + ν tr(ε) I"""
        if not -1.0 < nu <= 0.5:
            raise ValueError(f"泊松比 {nu} 超出 (-1, 0.5]")
        return cls(np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 1.0 - nu]]))

    @classmethod
    def from_config(cls) -> "MaterialTensor":
        return cls.identity() if MATERIAL_POISSON == 0.0 else cls.isotropic(MATERIAL_POISSON)

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    @property
    def is_identity(self) -> bool:
        return bool(np.allclose(self.matrix, np.eye(3)))

    def apply(self, m: PolyField) -> PolyField:
        """ℂ M（系数层面，逐分量线性）"""
        if m.kind is not FieldKind.TENSOR:
            raise ValueError("材料张量只作用于张量场")
        return m.with_coeffs(np.einsum("ij,...jm->...im", self.matrix, m.coeffs))

    def apply_inverse(self, m: PolyField) -> PolyField:
        return m.with_coeffs(np.einsum("ij,...jm->...im", self.inverse, m.coeffs))


@dataclass(frozen=True)
class Scheme:
    """离散格式：类型、材料张量、plain 格式的测试张量次数"""
    kind: SchemeKind = SchemeKind.THETA
    material: MaterialTensor = field(default_factory=MaterialTensor.identity)
    tensor_degree: int = 4

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.kind is SchemeKind.PLAIN and self.tensor_degree not in (2, 4):
            raise ValueError("plain 格式的测试张量次数只能是 2 或 4")
        if self.kind is SchemeKind.THETA and self.tensor_degree != 4:
            raise ValueError("theta 格式的测试张量次数固定为 4")

    @classmethod
    def theta(cls, material: MaterialTensor = None) -> "Scheme":
        return cls(SchemeKind.THETA, material or MaterialTensor.identity(), 4)

    @classmethod
    def plain(cls, tensor_degree: int = PLAIN_TENSOR_DEGREE, material: MaterialTensor = None) -> "Scheme":
        return cls(SchemeKind.PLAIN, material or MaterialTensor.identity(), tensor_degree)

    @property
    def has_theta(self) -> bool:
        return self.kind is SchemeKind.THETA

    @property
    def trial_layout(self) -> Dict[str, slice]:
        """局部试探向量中各块的位置"""
        if self.has_theta:
            return {"u": slice(0, 1), "theta": slice(1, 3), "M": slice(3, 6),
                    "uhat": slice(6, 15), "qhat": slice(15, 24)}
        return {"u": slice(0, 1), "M": slice(1, 4), "uhat": slice(4, 13), "qhat": slice(13, 22)}

    @property
    def n_fields(self) -> int:
        return 6 if self.has_theta else 4

    @property
    def n_trial(self) -> int:
        return self.n_fields + 18
