"""
Newest vertex bisection 加密

单元 (v0, v1, v2) 的加密边为 (v1, v2)，中点 m 成为两个子单元的最新顶点：
(m, v0, v1) 与 (m, v2, v0)，子单元的加密边恰为父单元的另两条边
"""
from typing import Dict, Iterable, List, Tuple

import numpy as np

from mesh.triangulation import Mesh
from utils.logger import logger

RULES = ("nvb", "uniform")


def _bisect(tri: Tuple[int, int, int], mid: int) -> Tuple[Tuple[int, int, int], Tuple[int, int, int]]:
    w0, w1, w2 = tri
    return (mid, w0, w1), (mid, w2, w0)


def _close_marking(mesh: Mesh, edge_marked: np.ndarray) -> np.ndarray:
    """闭包：任何含标记边的单元都必须标记自己的加密边"""
    ref_edges = mesh.t2e[:, 1]
    while True:
        has_marked = edge_marked[mesh.t2e].any(axis=1)
        need = has_marked & ~edge_marked[ref_edges]
        if not need.any():
            return edge_marked
        edge_marked[ref_edges[need]] = True


def refine(mesh: Mesh, marked: Iterable[int], rule: str = "nvb") -> Mesh:
    """加密被标记单元并做协调闭包

    rule="nvb" 只标记加密边；rule="uniform" 标记被选单元的全部三条边，
    对全体单元即得到每个单元四等分的一致加密
    """
    if rule not in RULES:
        raise ValueError(f"未知加密规则 {rule}，可选 {RULES}")
    marked = np.unique(np.asarray(list(marked), dtype=np.int64))
    if marked.size and (marked.min() < 0 or marked.max() >= mesh.n_triangles):
        raise ValueError("标记集合包含不存在的单元")
    if marked.size == 0:
        return Mesh(mesh.vertices.copy(), mesh.triangles.copy(),
                    parent=np.arange(mesh.n_triangles), domain=mesh.domain)

    edge_marked = np.zeros(mesh.n_edges, dtype=bool)
    if rule == "uniform":
        edge_marked[mesh.t2e[marked].ravel()] = True
    else:
        edge_marked[mesh.t2e[marked, 1]] = True
    edge_marked = _close_marking(mesh, edge_marked)

    marked_edges = np.flatnonzero(edge_marked)
    midpoint = np.full(mesh.n_edges, -1, dtype=np.int64)
    midpoint[marked_edges] = mesh.n_vertices + np.arange(len(marked_edges))
    new_vertices = np.vstack([
        mesh.vertices,
        mesh.vertices[mesh.edges[marked_edges]].mean(axis=1),
    ])

    children: List[Tuple[int, int, int]] = []
    parent: List[int] = []
    for t, tri in enumerate(mesh.triangles):
        e0, e1, e2 = mesh.t2e[t]
        if midpoint[e1] < 0:
            children.append(tuple(tri))
            parent.append(t)
            continue
        c1, c2 = _bisect(tuple(tri), int(midpoint[e1]))
        pieces = []
        pieces.extend(_bisect(c1, int(midpoint[e0])) if midpoint[e0] >= 0 else [c1])
        pieces.extend(_bisect(c2, int(midpoint[e2])) if midpoint[e2] >= 0 else [c2])
        children.extend(pieces)
        parent.extend([t] * len(pieces))

    refined = Mesh(new_vertices, np.array(children, dtype=np.int64),
                   parent=np.array(parent, dtype=np.int64), domain=mesh.domain)
    logger.debug(f"NVB 加密: 标记 {marked.size} 个单元, #T {mesh.n_triangles} -> {refined.n_triangles}")
    return refined


def refine_uniform(mesh: Mesh) -> Mesh:
    """一致加密：每个单元分成 4 个等面积子单元"""
    return refine(mesh, range(mesh.n_triangles), rule="uniform")


def genealogy(mesh: Mesh) -> Dict[int, List[int]]:
    """父单元 -> 子单元列表"""
    if mesh.parent is None:
        return {t: [t] for t in range(mesh.n_triangles)}
    family: Dict[int, List[int]] = {}
    for child, p in enumerate(mesh.parent):
        family.setdefault(int(p), []).append(child)
    return family


def prolongate(values: np.ndarray, mesh: Mesh) -> np.ndarray:
    """分片常数数据的注入：子单元继承父单元的值"""
    if mesh.parent is None:
        return np.array(values, copy=True)
    return np.asarray(values)[mesh.parent]
