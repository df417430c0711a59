"""
弯矩迹空间 Q̂_S

每个单元 9 个对偶系数 c = (c_vert[3], c_avg[3], c_nder[3])，分别对应泛函
顶点值 z(e_j)、边平均 |E|⁻¹∫_E z、边外法向导数积分 ∫_E n·∇z。
全局协调性通过约束把单元系数粘合起来：
- 内部边：c_avg⁺ + c_avg⁻ = 0，c_nder⁺ − c_nder⁻ = 0
- 内部顶点：Σ_{T∋e} c_vert^T(e) = 0
约束零空间维数为 2#E + 3#T − #N₀；求解时用零空间的显式稀疏基消去约束
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp

from config import EDGE_QUAD_DEGREE
from mesh.triangulation import REFERENCE_VERTICES, AffineMap, Mesh, edge_frames, reference_edge_points
from poly.fields import FieldKind, PolyField
from poly.quadrature import edge_quadrature
from utils.error_handler import MeshError
from utils.logger import logger

N_LOCAL = 9
VERT, AVG, NDER = 0, 3, 6


def qhat_functionals(amap: AffineMap, z: PolyField) -> np.ndarray:
    """单元上 9 个对偶泛函作用于（批量）标量场 z，返回 (*batch, 9)"""
    if z.kind is not FieldKind.SCALAR:
        raise ValueError("Q̂ 泛函只作用于标量场")
    rule = edge_quadrature(EDGE_QUAD_DEGREE)
    grad = z.grad()
    out = np.zeros(z.batch_shape + (N_LOCAL,))
    out[..., VERT:VERT + 3] = z.values(REFERENCE_VERTICES)
    for k, frame in enumerate(edge_frames(amap)):
        pts = reference_edge_points(k, rule.points)
        out[..., AVG + k] = z.values(pts) @ rule.weights
        out[..., NDER + k] = frame.length * ((grad.eval(pts) @ frame.normal) @ rule.weights)
    return out


def pair_qhat(coeffs: np.ndarray, amap: AffineMap, z: PolyField) -> np.ndarray:
    """⟨q̂, z⟩_{∂T} = Σ_j c_j f_j(z)"""
    coeffs = np.asarray(coeffs, dtype=float).reshape(N_LOCAL)
    return qhat_functionals(amap, z) @ coeffs


@dataclass
class MomentTraceDofs:
    """全局 Q̂_S：每个单元 9 个系数，形状 (T, 9)"""
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1, N_LOCAL)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "MomentTraceDofs":
        return cls(np.zeros((mesh.n_triangles, N_LOCAL)))

    @classmethod
    def from_free(cls, mesh: Mesh, x: np.ndarray) -> "MomentTraceDofs":
        """由零空间坐标恢复单元系数"""
        return cls(qhat_nullspace_basis(mesh) @ np.asarray(x, dtype=float))

    def local(self, t: int) -> np.ndarray:
        return self.coeffs[t]

    def constraint_residual(self, mesh: Mesh) -> float:
        C = assemble_qhat_constraints(mesh)
        if C.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(C @ self.coeffs.ravel())))

    def pair(self, mesh: Mesh, z_per_element: List[PolyField]) -> float:
        """Σ_T ⟨q̂, z_T⟩_{∂T}"""
        return float(sum(pair_qhat(self.coeffs[t], mesh.affine_map(t), z)
                         for t, z in enumerate(z_per_element)))


def _vertex_incidence(mesh: Mesh) -> List[List[Tuple[int, int]]]:
    """每个顶点的 (单元, 局部顶点) 列表，按单元编号排序"""
    incidence: List[List[Tuple[int, int]]] = [[] for _ in range(mesh.n_vertices)]
    for t, tri in enumerate(mesh.triangles):
        for j, v in enumerate(tri):
            incidence[int(v)].append((t, j))
    return incidence


def assemble_qhat_constraints(mesh: Mesh) -> sp.csr_matrix:
    """约束矩阵 C，协调系数满足 C c = 0，列按 9t + j 排列"""
    rows, cols, vals = [], [], []
    r = 0
    for e in np.flatnonzero(~mesh.edge_is_boundary):
        (tp, tm), (kp, km) = mesh.e2t[e], mesh.e2l[e]
        rows += [r, r, r + 1, r + 1]
        cols += [N_LOCAL * tp + AVG + kp, N_LOCAL * tm + AVG + km,
                 N_LOCAL * tp + NDER + kp, N_LOCAL * tm + NDER + km]
        vals += [1.0, 1.0, 1.0, -1.0]
        r += 2
    incidence = _vertex_incidence(mesh)
    for v in mesh.interior_vertices:
        for t, j in incidence[v]:
            rows.append(r)
            cols.append(N_LOCAL * t + VERT + j)
            vals.append(1.0)
        r += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(r, N_LOCAL * mesh.n_triangles))


def qhat_nullspace_basis(mesh: Mesh) -> sp.csr_matrix:
    """约束零空间的稀疏基 Z，形状 (9T, 2#E + 3#T − #N₀)

    列顺序：先按顶点编号给出顶点系数列，再按边编号给出 (平均, 法向导数) 两列
    """
    rows, cols, vals = [], [], []
    col = 0
    for v, members in enumerate(_vertex_incidence(mesh)):
        if mesh.vertex_is_boundary[v]:
            for t, j in members:
                rows.append(N_LOCAL * t + VERT + j)
                cols.append(col)
                vals.append(1.0)
                col += 1
            continue
        t0, j0 = members[0]
        for t, j in members[1:]:
            rows += [N_LOCAL * t + VERT + j, N_LOCAL * t0 + VERT + j0]
            cols += [col, col]
            vals += [1.0, -1.0]
            col += 1
    for e in range(mesh.n_edges):
        (tp, tm), (kp, km) = mesh.e2t[e], mesh.e2l[e]
        if tm < 0:
            rows += [N_LOCAL * tp + AVG + kp, N_LOCAL * tp + NDER + kp]
            cols += [col, col + 1]
            vals += [1.0, 1.0]
        else:
            rows += [N_LOCAL * tp + AVG + kp, N_LOCAL * tm + AVG + km,
                     N_LOCAL * tp + NDER + kp, N_LOCAL * tm + NDER + km]
            cols += [col, col, col + 1, col + 1]
            vals += [1.0, -1.0, 1.0, 1.0]
        col += 2
    expected = 2 * mesh.n_edges + 3 * mesh.n_triangles - mesh.n_interior_vertices
    if col != expected:
        raise MeshError(f"Q̂_S 维数 {col} 与公式 {expected} 不符")
    logger.debug(f"Q̂_S 零空间基: {N_LOCAL * mesh.n_triangles} x {col}")
    return sp.csr_matrix((vals, (rows, cols)), shape=(N_LOCAL * mesh.n_triangles, col))
