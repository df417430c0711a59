"""
挠度迹空间 Û_S

每个网格顶点携带 (v(e), ∇v(e))，单元上的 9 个局部自由度按顶点排列：
[v0, ∂x v0, ∂y v0, v1, ..., ∂y v2]。边上的值迹是端点值与端点切向导数的三次
Hermite 插值，法向导数迹是端点法向导数的线性插值；BoundaryTraceP32 另外
给每条边一个中点法向导数参数，对应气泡 4s(1−s)，共 12 个参数

单元内部的 Δ²v + v = 0 从不求解，所有配对只用到边界数据
"""
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from config import EDGE_QUAD_DEGREE
from mesh.triangulation import REFERENCE_VERTICES, AffineMap, Mesh, edge_frames, reference_edge_points
from poly.fields import FieldKind, PolyField
from poly.quadrature import edge_quadrature

N_LOCAL = 9
N_LOCAL_P32 = 12


# ----------------------------------------------------------------------
# Hermite 边基函数
# ----------------------------------------------------------------------
def _hermite(s: np.ndarray):
    """三次 Hermite 形函数及其对 s 的导数"""
    h = np.stack([1 - 3 * s**2 + 2 * s**3, s - 2 * s**2 + s**3, 3 * s**2 - 2 * s**3, -s**2 + s**3], axis=1)
    dh = np.stack([-6 * s + 6 * s**2, 1 - 4 * s + 3 * s**2, 6 * s - 6 * s**2, -2 * s + 3 * s**2], axis=1)
    return h, dh


class EdgeTraceBasis(NamedTuple):
    """局部边上按参数 s 采样的迹基矩阵，列对应局部自由度"""
    value: np.ndarray              # (nq, n)
    normal_derivative: np.ndarray  # (nq, n)
    gradient: np.ndarray           # (nq, 2, n)


def edge_trace_basis(amap: AffineMap, k: int, s: np.ndarray, enriched: bool = False) -> EdgeTraceBasis:
    """局部边 k（顶点 k -> k+1）上的迹基，enriched=True 时带 3 个边气泡列"""
    frame = edge_frames(amap)[k]
    t, n, length = frame.tangent, frame.normal, frame.length
    s = np.asarray(s, dtype=float)
    a, b = k, (k + 1) % 3
    n_cols = N_LOCAL_P32 if enriched else N_LOCAL
    h, dh = _hermite(s)

    value = np.zeros((len(s), n_cols))
    tangential = np.zeros((len(s), n_cols))
    normal = np.zeros((len(s), n_cols))

    value[:, 3 * a] = h[:, 0]
    value[:, 3 * a + 1:3 * a + 3] = length * h[:, 1:2] * t
    value[:, 3 * b] = h[:, 2]
    value[:, 3 * b + 1:3 * b + 3] = length * h[:, 3:4] * t

    tangential[:, 3 * a] = dh[:, 0] / length
    tangential[:, 3 * a + 1:3 * a + 3] = dh[:, 1:2] * t
    tangential[:, 3 * b] = dh[:, 2] / length
    tangential[:, 3 * b + 1:3 * b + 3] = dh[:, 3:4] * t

    normal[:, 3 * a + 1:3 * a + 3] = (1 - s)[:, None] * n
    normal[:, 3 * b + 1:3 * b + 3] = s[:, None] * n
    if enriched:
        normal[:, N_LOCAL + k] = 4 * s * (1 - s)

    gradient = t[None, :, None] * tangential[:, None, :] + n[None, :, None] * normal[:, None, :]
    return EdgeTraceBasis(value, normal, gradient)


# ----------------------------------------------------------------------
# 自由度容器
# ----------------------------------------------------------------------
@dataclass
class BoundaryTraceP32:
    """单元边界上的 P^{3,2}_c 迹：顶点值、顶点梯度、每条边的中点法向导数参数"""
    vertex_values: np.ndarray
    vertex_gradients: np.ndarray
    edge_normal: np.ndarray

    def __post_init__(self):
        self.vertex_values = np.asarray(self.vertex_values, dtype=float).reshape(3)
        self.vertex_gradients = np.asarray(self.vertex_gradients, dtype=float).reshape(3, 2)
        self.edge_normal = np.asarray(self.edge_normal, dtype=float).reshape(3)

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "BoundaryTraceP32":
        vec = np.asarray(vec, dtype=float).reshape(N_LOCAL_P32)
        vertex = vec[:N_LOCAL].reshape(3, 3)
        return cls(vertex[:, 0], vertex[:, 1:], vec[N_LOCAL:])

    @classmethod
    def basis(cls) -> np.ndarray:
        """12 个单位参数向量，每行一个"""
        return np.eye(N_LOCAL_P32)

    def as_vector(self) -> np.ndarray:
        vertex = np.column_stack([self.vertex_values, self.vertex_gradients]).ravel()
        return np.concatenate([vertex, self.edge_normal])

    def restrict(self) -> np.ndarray:
        """去掉边参数，得到 9 维的 Û_T 自由度"""
        return self.as_vector()[:N_LOCAL]


@dataclass
class DeflectionTraceDofs:
    """全局 Û_S 自由度：每个顶点的值与梯度，边界顶点为给定数据"""
    values: np.ndarray
    gradients: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        self.gradients = np.asarray(self.gradients, dtype=float).reshape(-1, 2)
        if len(self.values) != len(self.gradients):
            raise ValueError("顶点值与梯度个数不一致")

    @classmethod
    def zeros(cls, mesh: Mesh) -> "DeflectionTraceDofs":
        return cls(np.zeros(mesh.n_vertices), np.zeros((mesh.n_vertices, 2)))

    @classmethod
    def sample(cls, mesh: Mesh, value: Callable[[np.ndarray], np.ndarray],
               gradient: Callable[[np.ndarray], np.ndarray]) -> "DeflectionTraceDofs":
        """在所有顶点上采样函数值与梯度"""
        return cls(value(mesh.vertices), gradient(mesh.vertices))

    @classmethod
    def from_array(cls, data: np.ndarray) -> "DeflectionTraceDofs":
        """(N, 3) 或长度 3N 的 (v, ∂x v, ∂y v) 数组"""
        data = np.asarray(data, dtype=float).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1:])

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.values, self.gradients])

    def local(self, mesh: Mesh, t: int) -> np.ndarray:
        """单元 t 的 9 个局部自由度"""
        return self.as_array()[mesh.triangles[t]].ravel()

    def free_vector(self, mesh: Mesh) -> np.ndarray:
        """内部顶点上的 3#N₀ 个未知量"""
        return self.as_array()[mesh.interior_vertices].ravel()

    def boundary_only(self, mesh: Mesh) -> "DeflectionTraceDofs":
        """内部顶点清零，只保留边界数据"""
        data = self.as_array().copy()
        data[mesh.interior_vertices] = 0.0
        return DeflectionTraceDofs.from_array(data)


LocalTrace = Union[np.ndarray, BoundaryTraceP32]


def _local_vector(dofs: LocalTrace) -> np.ndarray:
    if isinstance(dofs, BoundaryTraceP32):
        return dofs.as_vector()
    vec = np.asarray(dofs, dtype=float).reshape(-1)
    if len(vec) not in (N_LOCAL, N_LOCAL_P32):
        raise ValueError(f"局部迹自由度长度应为 9 或 12，当前为 {len(vec)}")
    return vec


class EdgeTrace(NamedTuple):
    params: np.ndarray
    value: np.ndarray
    normal_derivative: np.ndarray
    gradient: np.ndarray


def edge_trace(dofs: LocalTrace, amap: AffineMap, k: int, s: Optional[np.ndarray] = None) -> EdgeTrace:
    """局部边 k 上的迹 v|_E、∂_n v|_E 和 ∇v|_E，在参数点 s 处取值"""
    if not 0 <= k < 3:
        raise IndexError(f"局部边编号 {k} 越界")
    vec = _local_vector(dofs)
    s = edge_quadrature(EDGE_QUAD_DEGREE).points if s is None else np.asarray(s, dtype=float)
    basis = edge_trace_basis(amap, k, s, enriched=len(vec) == N_LOCAL_P32)
    return EdgeTrace(s, basis.value @ vec, basis.normal_derivative @ vec, basis.gradient @ vec)


# ----------------------------------------------------------------------
# 配对
# ----------------------------------------------------------------------
def uhat_pairing_matrix(amap: AffineMap, xi: PolyField, tau: PolyField, enriched: bool = False) -> np.ndarray:
    """∮(n·τ)v − ∮(Ξn)·∇v 对局部迹自由度的系数，形状 (*batch, 9 或 12)

    xi、tau 为物理单元上的（批量）场，批量形状需一致
    """
    if xi.kind is not FieldKind.TENSOR or tau.kind is not FieldKind.VECTOR:
        raise ValueError("配对需要 (张量, 向量) 测试场")
    rule = edge_quadrature(EDGE_QUAD_DEGREE)
    frames = edge_frames(amap)
    n_cols = N_LOCAL_P32 if enriched else N_LOCAL
    out = np.zeros(np.broadcast_shapes(xi.batch_shape, tau.batch_shape) + (n_cols,))
    for k, frame in enumerate(frames):
        pts = reference_edge_points(k, rule.points)
        basis = edge_trace_basis(amap, k, rule.points, enriched)
        n = frame.normal
        tau_n = tau.eval(pts) @ n                              # (*batch, nq)
        xi_n = xi.tensor_values(pts) @ n                       # (*batch, nq, 2)
        integrand = (np.einsum("...q,qc->...qc", tau_n, basis.value)
                     - np.einsum("...qi,qic->...qc", xi_n, basis.gradient))
        out += frame.length * np.einsum("q,...qc->...c", rule.weights, integrand)
    return out


def uhat_divdiv_pairing_matrix(amap: AffineMap, theta: PolyField, enriched: bool = False) -> np.ndarray:
    """∮(n·DivΘ)v − ∮(Θn)·∇v 的系数"""
    return uhat_pairing_matrix(amap, theta, theta.div_rows(), enriched)


def pair_uhat_divdiv_vector(dofs: LocalTrace, amap: AffineMap, xi: PolyField, tau: PolyField) -> np.ndarray:
    """⟨û, (Ξ, τ)⟩_{∂T}"""
    vec = _local_vector(dofs)
    return uhat_pairing_matrix(amap, xi, tau, enriched=len(vec) == N_LOCAL_P32) @ vec


def pair_uhat_divdiv(dofs: LocalTrace, amap: AffineMap, theta: PolyField) -> np.ndarray:
    """⟨û, Θ⟩_{∂T}"""
    vec = _local_vector(dofs)
    return uhat_divdiv_pairing_matrix(amap, theta, enriched=len(vec) == N_LOCAL_P32) @ vec


def local_trace_of(amap: AffineMap, z: PolyField) -> np.ndarray:
    """把单元上的标量多项式在顶点处采样成 9 个局部迹自由度"""
    values = z.values(REFERENCE_VERTICES)
    grads = z.grad().eval(REFERENCE_VERTICES)
    return np.column_stack([values, grads]).ravel()
