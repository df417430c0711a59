"""
全局法方程组装

A = Σ_T P_Tᵀ B_Tᵀ G_T⁻¹ B_T P_T，rhs = Σ_T P_Tᵀ B_Tᵀ G_T⁻¹ (l_T − B_T g_T)

P_T 把全局未知量 [场 | Û 自由 | Q̂ 零空间坐标] 映到单元局部试探向量，
g_T 是边界顶点 Û 数据的提升。累加顺序按单元编号固定
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from dpg.local import LoadLike, LocalDpgSystem
from dpg.scheme import Scheme
from mesh.triangulation import Mesh
from traces.deflection import DeflectionTraceDofs
from traces.dofs import DofLayout
from traces.moment import N_LOCAL, qhat_nullspace_basis
from utils.logger import logger
from utils.task_queue import ElementTaskPool


@dataclass
class ElementMap:
    """单元 t 的局部-全局映射：local = P @ x[cols] + lift"""
    cols: np.ndarray
    P: np.ndarray
    lift: np.ndarray


@dataclass
class DpgSystem:
    mesh: Mesh
    scheme: Scheme
    layout: DofLayout
    locals: List[LocalDpgSystem]
    maps: List[ElementMap]
    A: sp.csr_matrix
    rhs: np.ndarray
    boundary: DeflectionTraceDofs
    stats: dict = field(default_factory=dict)

    @property
    def ndof(self) -> int:
        return self.layout.ndof

    def local_vector(self, x: np.ndarray, t: int) -> np.ndarray:
        m = self.maps[t]
        return m.P @ np.asarray(x)[m.cols] + m.lift

    def residual_norm2(self, x: np.ndarray) -> np.ndarray:
        """每个单元的 r_Tᵀ G_T⁻¹ r_T"""
        return np.array([loc.residual_norm2(self.local_vector(x, t)) for t, loc in enumerate(self.locals)])


def element_maps(mesh: Mesh, scheme: Scheme, layout: DofLayout,
                 boundary: DeflectionTraceDofs) -> List[ElementMap]:
    """构造所有单元的 P_T 与提升向量"""
    Z = qhat_nullspace_basis(mesh).tocsr()
    trial = scheme.trial_layout
    n_fields = scheme.n_fields
    boundary_data = boundary.boundary_only(mesh)
    maps = []
    for t in range(mesh.n_triangles):
        field_cols = np.arange(n_fields * t, n_fields * (t + 1))
        uhat_idx = layout.uhat_indices(t)
        free = uhat_idx >= 0
        block = Z[N_LOCAL * t:N_LOCAL * (t + 1)]
        q_cols = np.unique(block.indices)
        q_block = block[:, q_cols].toarray()

        cols = np.concatenate([field_cols, uhat_idx[free], layout.qhat_offset + q_cols])
        P = np.zeros((scheme.n_trial, len(cols)))
        P[trial["u"].start:trial["uhat"].start, :n_fields] = np.eye(n_fields)
        uhat_rows = np.arange(trial["uhat"].start, trial["uhat"].stop)[free]
        P[uhat_rows, n_fields + np.arange(free.sum())] = 1.0
        P[trial["qhat"], n_fields + free.sum():] = q_block

        lift = np.zeros(scheme.n_trial)
        lift[trial["uhat"]] = boundary_data.local(mesh, t)
        maps.append(ElementMap(cols, P, lift))
    return maps


def assemble(mesh: Mesh, scheme: Scheme, f: LoadLike = None,
             boundary: Optional[DeflectionTraceDofs] = None, threads: int = 1) -> DpgSystem:
    """组装全局对称正定系统"""
    layout = DofLayout.build(mesh, scheme.kind)
    boundary = boundary if boundary is not None else DeflectionTraceDofs.zeros(mesh)
    maps = element_maps(mesh, scheme, layout, boundary)

    def build(t: int) -> LocalDpgSystem:
        return LocalDpgSystem.build(mesh.affine_map(t), scheme, f, element=t)

    with ElementTaskPool(threads) as pool:
        local_systems = pool.map(build, range(mesh.n_triangles))

    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []
    rhs = np.zeros(layout.ndof)
    for loc, m in zip(local_systems, maps):
        N = loc.normal_matrix()
        local_rhs = loc.normal_rhs() - N @ m.lift
        block = m.P.T @ N @ m.P
        rows.append(np.repeat(m.cols, len(m.cols)))
        cols.append(np.tile(m.cols, len(m.cols)))
        vals.append(block.ravel())
        np.add.at(rhs, m.cols, m.P.T @ local_rhs)

    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(layout.ndof, layout.ndof)).tocsr()
    conditions = np.array([loc.condition for loc in local_systems])
    stats = {"max_gram_condition": float(conditions.max(initial=0.0)), "nnz": int(A.nnz)}
    logger.info(f"组装完成: 格式 {scheme.kind.value}, #T={mesh.n_triangles}, ndof={layout.ndof}, nnz={A.nnz}")
    if stats["max_gram_condition"] > 1e12:
        logger.warning(f"局部 Gram 矩阵条件数偏大: {stats['max_gram_condition']:.3e}")
    return DpgSystem(mesh, scheme, layout, local_systems, maps, A, rhs, boundary, stats)


def symmetry_defect(A: sp.spmatrix) -> float:
    """‖A − Aᵀ‖_max"""
    D = (A - A.T).tocoo()
    return float(np.max(np.abs(D.data), initial=0.0))
