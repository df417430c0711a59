"""
多项式场：单项式系数表示与精确微分算子

一个场存储为参考坐标单项式 x^i y^j 的系数，形状 (*batch, ncomp, dim)。
若附带仿射映射 amap，则系数描述的是复合 f∘F_T，导数按链式法则换算到物理坐标；
对称张量按 (xx, yy, xy) 三个分量存储
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING, Dict, Iterable, Optional, Tuple

import numpy as np

if TYPE_CHECKING:
    from mesh.triangulation import AffineMap


class FieldKind(str, Enum):
    """场的取值类型"""
    SCALAR = "scalar"
    VECTOR = "vector"
    TENSOR = "tensor"

    @property
    def ncomp(self) -> int:
        return {"scalar": 1, "vector": 2, "tensor": 3}[self.value]


def dim_p(p: int) -> int:
    """P^p 的维数"""
    if p < 0:
        return 0
    return (p + 1) * (p + 2) // 2


@lru_cache(maxsize=None)
def monomial_exponents(p: int) -> np.ndarray:
    """按总次数、再按 y 的幂排序的指数表 (dim, 2)"""
    exps = [(k - j, j) for k in range(p + 1) for j in range(k + 1)]
    arr = np.array(exps, dtype=int).reshape(-1, 2)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _monomial_index(p: int) -> Dict[Tuple[int, int], int]:
    return {(int(i), int(j)): k for k, (i, j) in enumerate(monomial_exponents(p))}


def eval_monomials(p: int, points: np.ndarray) -> np.ndarray:
    """单项式在点集上的值 (npts, dim)"""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    exps = monomial_exponents(p)
    return pts[:, 0:1] ** exps[:, 0] * pts[:, 1:2] ** exps[:, 1]


@lru_cache(maxsize=None)
def derivative_matrix(p: int, axis: int) -> np.ndarray:
    """参考坐标下 ∂_x (axis=0) 或 ∂_y (axis=1) 的系数矩阵，系数列向量左乘"""
    exps = monomial_exponents(p)
    index = _monomial_index(p)
    D = np.zeros((len(exps), len(exps)))
    for k, (i, j) in enumerate(exps):
        power = i if axis == 0 else j
        if power == 0:
            continue
        target = (i - 1, j) if axis == 0 else (i, j - 1)
        D[index[target], k] = power
    D.setflags(write=False)
    return D


def _binv(amap: Optional["AffineMap"]) -> np.ndarray:
    return np.eye(2) if amap is None else amap.B_inv


@dataclass(frozen=True)
class PolyField:
    """（批量）多项式场"""
    kind: FieldKind
    degree: int
    coeffs: np.ndarray
    amap: Optional["AffineMap"] = None

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim < 2 or coeffs.shape[-2] != self.kind.ncomp or coeffs.shape[-1] != dim_p(self.degree):
            raise ValueError(
                f"系数形状 {coeffs.shape} 与 {self.kind.value} 场 (次数 {self.degree}) 不匹配"
            )
        object.__setattr__(self, "coeffs", coeffs)

    # ------------------------------------------------------------------
    # 构造
    # ------------------------------------------------------------------
    @classmethod
    def zeros(cls, kind: FieldKind, degree: int, batch: Tuple[int, ...] = (),
              amap: Optional["AffineMap"] = None) -> "PolyField":
        return cls(kind, degree, np.zeros(batch + (kind.ncomp, dim_p(degree))), amap)

    @classmethod
    def scalar(cls, terms: Dict[Tuple[int, int], float], degree: Optional[int] = None,
               amap: Optional["AffineMap"] = None) -> "PolyField":
        """由 {(i, j): 系数} 构造标量多项式 Σ c x^i y^j"""
        p = degree if degree is not None else max((i + j for i, j in terms), default=0)
        coeffs = np.zeros((1, dim_p(p)))
        index = _monomial_index(p)
        for (i, j), c in terms.items():
            coeffs[0, index[(i, j)]] += c
        return cls(FieldKind.SCALAR, p, coeffs, amap)

    @classmethod
    def vector(cls, x: "PolyField", y: "PolyField") -> "PolyField":
        p = max(x.degree, y.degree)
        parts = [c.with_degree(p).coeffs for c in (x, y)]
        return cls(FieldKind.VECTOR, p, np.concatenate(parts, axis=-2), x.amap)

    @classmethod
    def tensor(cls, xx: "PolyField", yy: "PolyField", xy: "PolyField") -> "PolyField":
        p = max(xx.degree, yy.degree, xy.degree)
        parts = [c.with_degree(p).coeffs for c in (xx, yy, xy)]
        return cls(FieldKind.TENSOR, p, np.concatenate(parts, axis=-2), xx.amap)

    @classmethod
    def random(cls, kind: FieldKind, degree: int, rng: np.random.Generator,
               batch: Tuple[int, ...] = (), amap: Optional["AffineMap"] = None) -> "PolyField":
        coeffs = rng.standard_normal(batch + (kind.ncomp, dim_p(degree)))
        return cls(kind, degree, coeffs, amap)

    # ------------------------------------------------------------------
    # 结构操作
    # ------------------------------------------------------------------
    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.coeffs.shape[:-2]

    def __len__(self) -> int:
        if not self.batch_shape:
            raise TypeError("非批量场没有长度")
        return self.batch_shape[0]

    def __getitem__(self, idx) -> "PolyField":
        if not self.batch_shape:
            raise TypeError("非批量场不支持下标")
        return PolyField(self.kind, self.degree, self.coeffs[idx], self.amap)

    def with_coeffs(self, coeffs: np.ndarray, kind: Optional[FieldKind] = None) -> "PolyField":
        return PolyField(kind or self.kind, self.degree, coeffs, self.amap)

    def with_map(self, amap: Optional["AffineMap"]) -> "PolyField":
        return PolyField(self.kind, self.degree, self.coeffs, amap)

    def with_degree(self, q: int) -> "PolyField":
        """补零升次或截断高次系数"""
        if q == self.degree:
            return self
        n_old, n_new = dim_p(self.degree), dim_p(q)
        if n_new > n_old:
            pad = [(0, 0)] * (self.coeffs.ndim - 1) + [(0, n_new - n_old)]
            coeffs = np.pad(self.coeffs, pad)
        else:
            coeffs = self.coeffs[..., :n_new]
        return PolyField(self.kind, q, coeffs, self.amap)

    def top_degree_norm(self, q: int) -> float:
        """次数高于 q 的系数的最大模（判断实际次数）"""
        if q >= self.degree:
            return 0.0
        return float(np.max(np.abs(self.coeffs[..., dim_p(q):]), initial=0.0))

    def combine(self, weights: np.ndarray) -> "PolyField":
        """批量场按权重线性组合：Σ_k w_k f_k，weights 形状 (..., n)"""
        coeffs = np.tensordot(np.asarray(weights, dtype=float), self.coeffs, axes=([-1], [0]))
        return PolyField(self.kind, self.degree, coeffs, self.amap)

    # ------------------------------------------------------------------
    # 算术
    # ------------------------------------------------------------------
    def _aligned(self, other: "PolyField") -> Tuple[np.ndarray, np.ndarray, int]:
        if self.kind != other.kind:
            raise ValueError(f"场类型不同: {self.kind.value} vs {other.kind.value}")
        p = max(self.degree, other.degree)
        return self.with_degree(p).coeffs, other.with_degree(p).coeffs, p

    def __add__(self, other: "PolyField") -> "PolyField":
        a, b, p = self._aligned(other)
        return PolyField(self.kind, p, a + b, self.amap)

    def __sub__(self, other: "PolyField") -> "PolyField":
        a, b, p = self._aligned(other)
        return PolyField(self.kind, p, a - b, self.amap)

    def __neg__(self) -> "PolyField":
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, factor: float) -> "PolyField":
        return self.with_coeffs(self.coeffs * factor)

    __rmul__ = __mul__

    # ------------------------------------------------------------------
    # 求值
    # ------------------------------------------------------------------
    def eval(self, ref_points: np.ndarray) -> np.ndarray:
        """在参考点 x̂ 处求 f(F(x̂))，返回 (*batch, npts, ncomp)"""
        V = eval_monomials(self.degree, ref_points)
        return np.einsum("...cm,pm->...pc", self.coeffs, V)

    def values(self, ref_points: np.ndarray) -> np.ndarray:
        """标量场返回 (*batch, npts)，其余同 eval"""
        vals = self.eval(ref_points)
        return vals[..., 0] if self.kind is FieldKind.SCALAR else vals

    def tensor_values(self, ref_points: np.ndarray) -> np.ndarray:
        """对称张量场的完整 2×2 值 (*batch, npts, 2, 2)"""
        if self.kind is not FieldKind.TENSOR:
            raise ValueError("tensor_values 只适用于张量场")
        return voigt_to_full(self.eval(ref_points))

    def eval_physical(self, points: np.ndarray) -> np.ndarray:
        """在物理点处求值"""
        pts = np.atleast_2d(points)
        ref = pts if self.amap is None else self.amap.to_reference(pts)
        return self.values(ref)

    # ------------------------------------------------------------------
    # 微分算子（链式法则：∂_i = Σ_c (B⁻¹)_{ci} ∂̂_c）
    # ------------------------------------------------------------------
    def _ref_partial(self, coeffs: np.ndarray, axis: int) -> np.ndarray:
        return np.einsum("ij,...j->...i", derivative_matrix(self.degree, axis), coeffs)

    def _partials(self, coeffs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        binv = _binv(self.amap)
        dx_ref = self._ref_partial(coeffs, 0)
        dy_ref = self._ref_partial(coeffs, 1)
        return (binv[0, 0] * dx_ref + binv[1, 0] * dy_ref,
                binv[0, 1] * dx_ref + binv[1, 1] * dy_ref)

    def grad(self) -> "PolyField":
        if self.kind is not FieldKind.SCALAR:
            raise ValueError("grad 只适用于标量场")
        dx, dy = self._partials(self.coeffs[..., 0, :])
        return self.with_coeffs(np.stack([dx, dy], axis=-2), FieldKind.VECTOR)

    def hessian(self) -> "PolyField":
        """标量场的 Hessian，即 ε∇z，按 (xx, yy, xy) 存储"""
        g = self.grad()
        gx_x, gx_y = self._partials(g.coeffs[..., 0, :])
        gy_x, gy_y = self._partials(g.coeffs[..., 1, :])
        return self.with_coeffs(np.stack([gx_x, gy_y, 0.5 * (gx_y + gy_x)], axis=-2), FieldKind.TENSOR)

    def div(self) -> "PolyField":
        if self.kind is not FieldKind.VECTOR:
            raise ValueError("div 只适用于向量场")
        dx, _ = self._partials(self.coeffs[..., 0, :])
        _, dy = self._partials(self.coeffs[..., 1, :])
        return self.with_coeffs((dx + dy)[..., None, :], FieldKind.SCALAR)

    def div_rows(self) -> "PolyField":
        """按行取散度 Div Θ"""
        if self.kind is not FieldKind.TENSOR:
            raise ValueError("div_rows 只适用于张量场")
        xx_x, _ = self._partials(self.coeffs[..., 0, :])
        _, yy_y = self._partials(self.coeffs[..., 1, :])
        xy_x, xy_y = self._partials(self.coeffs[..., 2, :])
        return self.with_coeffs(np.stack([xx_x + xy_y, xy_x + yy_y], axis=-2), FieldKind.VECTOR)

    def divdiv(self) -> "PolyField":
        return self.div_rows().div()


def voigt_to_full(values: np.ndarray) -> np.ndarray:
    """(..., 3) 的 (xx, yy, xy) 转为 (..., 2, 2)"""
    xx, yy, xy = values[..., 0], values[..., 1], values[..., 2]
    return np.stack([np.stack([xx, xy], axis=-1), np.stack([xy, yy], axis=-1)], axis=-2)


def full_to_voigt(values: np.ndarray) -> np.ndarray:
    """(..., 2, 2) 转为 (xx, yy, xy)，非对称部分取平均"""
    return np.stack([values[..., 0, 0], values[..., 1, 1],
                     0.5 * (values[..., 0, 1] + values[..., 1, 0])], axis=-1)


def stack_fields(fields: Iterable[PolyField]) -> PolyField:
    """把若干同类型场堆成一个批量场"""
    fields = list(fields)
    p = max(f.degree for f in fields)
    coeffs = np.stack([f.with_degree(p).coeffs for f in fields], axis=0)
    return PolyField(fields[0].kind, p, coeffs, fields[0].amap)
