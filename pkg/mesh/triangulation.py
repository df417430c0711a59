"""
协调三角网格、单元仿射映射与边几何

约定：
- 三角形顶点逆时针排列，局部边 k 从顶点 k 指向顶点 (k+1) mod 3；
- 加密边（newest vertex bisection 的二分边）总是局部边 1，即顶点 0 的对边
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import List, NamedTuple, Optional, Union

import numpy as np

from mesh.domains import Domain, SeedTriangulation, polygon_area
from utils.error_handler import DegenerateElementError, MeshError
from utils.logger import logger

REFERENCE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
REFINEMENT_EDGE = 1
_DEGENERATE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class AffineMap:
    """F_T(x̂) = B x̂ + a"""
    B: np.ndarray
    a: np.ndarray
    J: float
    h: float

    @classmethod
    def from_vertices(cls, vertices: np.ndarray, require_positive: bool = True) -> "AffineMap":
        X = np.asarray(vertices, dtype=float).reshape(3, 2)
        B = np.column_stack([X[1] - X[0], X[2] - X[0]])
        J = float(np.linalg.det(B))
        h = float(max(np.linalg.norm(X[(k + 1) % 3] - X[k]) for k in range(3)))
        if h == 0.0 or abs(J) <= _DEGENERATE_TOL * h * h:
            raise DegenerateElementError(f"退化单元: 顶点 {X.tolist()} 共线或重合")
        if require_positive and J < 0:
            raise DegenerateElementError(f"单元方向为顺时针 (J={J:.3e})")
        return cls(B=B, a=X[0].copy(), J=J, h=h)

    @classmethod
    def from_matrix(cls, B: np.ndarray, a: Optional[np.ndarray] = None) -> "AffineMap":
        """直接由矩阵构造，允许 J < 0（变换模块自行拒绝）"""
        B = np.asarray(B, dtype=float).reshape(2, 2)
        a = np.zeros(2) if a is None else np.asarray(a, dtype=float).reshape(2)
        X = np.vstack([a, a + B[:, 0], a + B[:, 1]])
        return cls.from_vertices(X, require_positive=False)

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls.from_vertices(REFERENCE_VERTICES)

    @cached_property
    def B_inv(self) -> np.ndarray:
        return np.linalg.inv(self.B)

    @property
    def vertices(self) -> np.ndarray:
        return np.vstack([self.a, self.a + self.B[:, 0], self.a + self.B[:, 1]])

    @property
    def area(self) -> float:
        return 0.5 * abs(self.J)

    def to_physical(self, ref_points: np.ndarray) -> np.ndarray:
        return np.atleast_2d(ref_points) @ self.B.T + self.a

    def to_reference(self, points: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(points) - self.a) @ self.B_inv.T


class EdgeFrame(NamedTuple):
    """单元边的几何：外法向、切向（法向逆时针旋转 90°）、长度、起止点"""
    normal: np.ndarray
    tangent: np.ndarray
    length: float
    endpoints: np.ndarray


def edge_frames(amap: AffineMap) -> List[EdgeFrame]:
    """三条局部边的几何，按局部边编号"""
    X = amap.vertices
    frames = []
    for k in range(3):
        start, end = X[k], X[(k + 1) % 3]
        d = end - start
        length = float(np.hypot(d[0], d[1]))
        t = d / length
        n = np.array([t[1], -t[0]])
        frames.append(EdgeFrame(normal=n, tangent=t, length=length, endpoints=np.vstack([start, end])))
    return frames


def reference_edge_points(k: int, s: np.ndarray) -> np.ndarray:
    """参考三角形局部边 k 上参数 s ∈ [0,1] 对应的参考点"""
    start = REFERENCE_VERTICES[k]
    end = REFERENCE_VERTICES[(k + 1) % 3]
    s = np.asarray(s, dtype=float)
    return start + s[:, None] * (end - start)


def _freeze(*arrays: np.ndarray) -> None:
    for arr in arrays:
        arr.setflags(write=False)


@dataclass
class Mesh:
    """协调三角网格；构造完成后数组只读，可在线程间共享"""
    vertices: np.ndarray
    triangles: np.ndarray
    parent: Optional[np.ndarray] = None
    domain: Optional[Domain] = None
    edges: np.ndarray = field(init=False, repr=False)
    t2e: np.ndarray = field(init=False, repr=False)
    e2t: np.ndarray = field(init=False, repr=False)
    e2l: np.ndarray = field(init=False, repr=False)
    edge_is_boundary: np.ndarray = field(init=False, repr=False)
    vertex_is_boundary: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.array(self.vertices, dtype=float).reshape(-1, 2)
        self.triangles = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.parent is not None:
            self.parent = np.array(self.parent, dtype=np.int64)
        self._build_topology()
        _freeze(self.vertices, self.triangles, self.edges, self.t2e, self.e2t, self.e2l,
                self.edge_is_boundary, self.vertex_is_boundary)
        if self.parent is not None:
            _freeze(self.parent)

    def _build_topology(self) -> None:
        tri = self.triangles
        n_t = len(tri)
        local = np.stack([tri, np.roll(tri, -1, axis=1)], axis=2).reshape(-1, 2)  # (3T, 2)
        directed = {tuple(e) for e in local.tolist()}
        if len(directed) != len(local):
            raise MeshError("网格方向不一致：同一有向边出现在两个单元中")
        edges, inverse = np.unique(np.sort(local, axis=1), axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        counts = np.bincount(inverse, minlength=len(edges))
        if np.any(counts > 2):
            raise MeshError(f"非协调网格：{int(np.sum(counts > 2))} 条边被超过两个单元共享")

        flat_t = np.repeat(np.arange(n_t), 3)
        flat_k = np.tile(np.arange(3), n_t)
        order = np.argsort(inverse, kind="stable")
        se, st, sk = inverse[order], flat_t[order], flat_k[order]
        first = np.r_[True, se[1:] != se[:-1]]
        e2t = np.full((len(edges), 2), -1, dtype=np.int64)
        e2l = np.full((len(edges), 2), -1, dtype=np.int64)
        e2t[se[first], 0] = st[first]
        e2l[se[first], 0] = sk[first]
        e2t[se[~first], 1] = st[~first]
        e2l[se[~first], 1] = sk[~first]

        self.edges = edges.astype(np.int64)
        self.t2e = inverse.reshape(n_t, 3).astype(np.int64)
        self.e2t = e2t
        self.e2l = e2l
        self.edge_is_boundary = e2t[:, 1] < 0
        vb = np.zeros(len(self.vertices), dtype=bool)
        vb[self.edges[self.edge_is_boundary].ravel()] = True
        self.vertex_is_boundary = vb

    # ------------------------------------------------------------------
    # 计数
    # ------------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def interior_vertices(self) -> np.ndarray:
        return np.flatnonzero(~self.vertex_is_boundary)

    @property
    def n_interior_vertices(self) -> int:
        return int(np.count_nonzero(~self.vertex_is_boundary))

    @property
    def refinement_edge(self) -> np.ndarray:
        """每个单元的加密边局部编号（归一化后恒为 1）"""
        return np.full(self.n_triangles, REFINEMENT_EDGE, dtype=np.int64)

    # ------------------------------------------------------------------
    # 几何
    # ------------------------------------------------------------------
    def affine_map(self, t: int) -> AffineMap:
        if not 0 <= t < self.n_triangles:
            raise IndexError(f"单元编号 {t} 越界")
        return self.affine_maps[t]

    @cached_property
    def affine_maps(self) -> List[AffineMap]:
        return [AffineMap.from_vertices(self.vertices[tri]) for tri in self.triangles]

    def edge_frame(self, t: int, k: int) -> EdgeFrame:
        if not 0 <= k < 3:
            raise IndexError(f"局部边编号 {k} 越界")
        return edge_frames(self.affine_map(t))[k]

    @cached_property
    def areas(self) -> np.ndarray:
        X = self.vertices[self.triangles]
        d1, d2 = X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def diameters(self) -> np.ndarray:
        X = self.vertices[self.triangles]
        lengths = np.linalg.norm(X[:, [1, 2, 0]] - X, axis=2)
        return lengths.max(axis=1)

    @property
    def h_max(self) -> float:
        return float(self.diameters.max())

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def min_angles(self) -> np.ndarray:
        """每个单元的最小内角（弧度）"""
        X = self.vertices[self.triangles]
        angles = []
        for k in range(3):
            u = X[:, (k + 1) % 3] - X[:, k]
            v = X[:, (k + 2) % 3] - X[:, k]
            cos = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            angles.append(np.arccos(np.clip(cos, -1.0, 1.0)))
        return np.min(np.stack(angles, axis=1), axis=1)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    # ------------------------------------------------------------------
    # 文本导出
    # ------------------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"{self.n_vertices} {self.n_edges} {self.n_triangles}"]
        for (x, y), flag in zip(self.vertices, self.vertex_is_boundary):
            lines.append(f"{x:.17g} {y:.17g} {int(flag)}")
        for tri, ref in zip(self.triangles, self.refinement_edge):
            lines.append(f"{tri[0]} {tri[1]} {tri[2]} {ref}")
        return "\n".join(lines) + "\n"

    def dump(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_text(), encoding="utf-8")
        logger.debug(f"网格已写出: {path} ({self.n_triangles} 个单元)")
        return path


def load_mesh(path: Union[str, Path]) -> Mesh:
    """读取 dump 写出的文本网格"""
    rows = Path(path).read_text(encoding="utf-8").split("\n")
    n_v, _, n_t = (int(v) for v in rows[0].split())
    vertices = np.array([[float(v) for v in rows[1 + i].split()[:2]] for i in range(n_v)])
    tri_rows = [rows[1 + n_v + i].split() for i in range(n_t)]
    triangles = np.array([[int(v) for v in r[:3]] for r in tri_rows], dtype=np.int64)
    refs = np.array([int(r[3]) for r in tri_rows], dtype=np.int64)
    # 把加密边旋转到局部边 1
    shift = (refs - REFINEMENT_EDGE) % 3
    triangles = np.array([np.roll(t, -s) for t, s in zip(triangles, shift)]).reshape(-1, 3)
    return Mesh(vertices, triangles)


def _orient_longest_edge(vertices: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """旋转顶点使最长边成为局部边 1；等长时取对顶点编号最小者"""
    X = vertices[tri]
    lengths = np.array([np.linalg.norm(X[(k + 1) % 3] - X[k]) for k in range(3)])
    longest = lengths.max()
    candidates = [k for k in range(3) if lengths[k] >= longest * (1.0 - 1e-12)]
    # 局部边 k 的对顶点为 (k+2) mod 3
    k_best = min(candidates, key=lambda k: tri[(k + 2) % 3])
    opposite = (k_best + 2) % 3
    return np.roll(tri, -opposite)


def _check_hanging_nodes(vertices: np.ndarray, edges: np.ndarray) -> None:
    a = vertices[edges[:, 0]]
    b = vertices[edges[:, 1]]
    d = b - a
    len2 = np.einsum("ij,ij->i", d, d)
    for v, p in enumerate(vertices):
        w = p - a
        cross = d[:, 0] * w[:, 1] - d[:, 1] * w[:, 0]
        s = np.einsum("ij,ij->i", w, d) / len2
        on_line = np.abs(cross) <= 1e-12 * len2
        inside = (s > 1e-12) & (s < 1.0 - 1e-12)
        not_endpoint = (edges[:, 0] != v) & (edges[:, 1] != v)
        if np.any(on_line & inside & not_endpoint):
            raise MeshError(f"非协调网格：顶点 {v} 悬挂在某条边内部")


def build_initial_mesh(domain: Domain, seed: SeedTriangulation) -> Mesh:
    """由多边形区域与种子三角剖分构造初始网格"""
    vertices = np.asarray(seed.vertices, dtype=float)
    triangles = np.asarray(seed.triangles, dtype=np.int64).reshape(-1, 3)
    for t, tri in enumerate(triangles):
        try:
            AffineMap.from_vertices(vertices[tri])
        except DegenerateElementError as e:
            raise MeshError(f"种子单元 {t} 无效（orientation/degenerate）: {e}") from e

    oriented = np.array([_orient_longest_edge(vertices, tri) for tri in triangles]).reshape(-1, 3)
    mesh = Mesh(vertices, oriented, domain=domain)
    _check_hanging_nodes(mesh.vertices, mesh.edges)

    total = float(mesh.areas.sum())
    expected = polygon_area(domain.polygon)
    if abs(total - expected) > 1e-12 * max(expected, 1.0):
        raise MeshError(f"种子三角形面积之和 {total} 与区域面积 {expected} 不一致")
    logger.info(f"初始网格: 区域 {domain.name}, #N={mesh.n_vertices}, #E={mesh.n_edges}, #T={mesh.n_triangles}")
    return mesh
