"""
自由度计数与全局排列

全局未知量排列为 [单元常数场 | Û_S 内部顶点 | Q̂_S 零空间坐标]
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from mesh.triangulation import Mesh

FIELD_DOFS = {"theta": 6, "plain": 4}


@dataclass(frozen=True)
class DofCounts:
    uhat: int
    qhat: int
    fields: int

    @property
    def total(self) -> int:
        return self.uhat + self.qhat + self.fields


def _scheme_name(scheme) -> str:
    name = getattr(scheme, "value", scheme)
    if name not in FIELD_DOFS:
        raise ValueError(f"未知格式 {scheme}")
    return name


def count_dofs(mesh: Mesh, scheme="theta") -> DofCounts:
    """(dim Û_S, dim Q̂_S, 场块维数)"""
    return DofCounts(
        uhat=3 * mesh.n_interior_vertices,
        qhat=2 * mesh.n_edges + 3 * mesh.n_triangles - mesh.n_interior_vertices,
        fields=FIELD_DOFS[_scheme_name(scheme)] * mesh.n_triangles,
    )


@dataclass(frozen=True, eq=False)
class DofLayout:
    """全局自由度的偏移与顶点编号映射"""
    mesh: Mesh
    scheme: str

    @classmethod
    def build(cls, mesh: Mesh, scheme) -> "DofLayout":
        return cls(mesh, _scheme_name(scheme))

    @cached_property
    def counts(self) -> DofCounts:
        return count_dofs(self.mesh, self.scheme)

    @property
    def n_fields_per_element(self) -> int:
        return FIELD_DOFS[self.scheme]

    @property
    def uhat_offset(self) -> int:
        return self.counts.fields

    @property
    def qhat_offset(self) -> int:
        return self.counts.fields + self.counts.uhat

    @property
    def ndof(self) -> int:
        return self.counts.total

    @cached_property
    def free_vertex_rank(self) -> np.ndarray:
        """内部顶点在 Û_S 块中的序号，边界顶点为 −1"""
        rank = np.full(self.mesh.n_vertices, -1, dtype=np.int64)
        interior = self.mesh.interior_vertices
        rank[interior] = np.arange(len(interior))
        return rank

    def field_slice(self, t: int) -> slice:
        n = self.n_fields_per_element
        return slice(n * t, n * (t + 1))

    def uhat_indices(self, t: int) -> np.ndarray:
        """单元 t 的 9 个局部 Û 自由度对应的全局编号，边界顶点为 −1"""
        rank = self.free_vertex_rank[self.mesh.triangles[t]]
        idx = self.uhat_offset + 3 * rank[:, None] + np.arange(3)[None, :]
        idx[rank < 0] = -1
        return idx.ravel()

    def split(self, x: np.ndarray):
        """把全局向量拆成 (场, Û 自由部分, Q̂ 坐标)"""
        x = np.asarray(x)
        return x[:self.uhat_offset], x[self.uhat_offset:self.qhat_offset], x[self.qhat_offset:]
