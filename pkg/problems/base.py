"""
制造解的统一接口
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from dpg.scheme import MaterialTensor
from mesh.domains import Domain, SeedTriangulation
from mesh.triangulation import Mesh, build_initial_mesh
from poly.fields import full_to_voigt
from traces.deflection import DeflectionTraceDofs

PointFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ManufacturedSolution:
    """精确解 u 及其导数；M = −ℂ ε∇u，θ = ∇u，f = −div Div M

    hessian 返回 (n, 2, 2)；f 为 None 表示零载荷
    """
    name: str
    domain_factory: Callable[[], Tuple[Domain, SeedTriangulation]]
    u: PointFunction
    gradient: PointFunction
    hessian: PointFunction
    f: Optional[PointFunction] = None
    material: MaterialTensor = field(default_factory=MaterialTensor.identity)
    corner: Optional[Tuple[float, float]] = None
    params: Dict[str, float] = field(default_factory=dict)

    def initial_mesh(self) -> Mesh:
        domain, seed = self.domain_factory()
        return build_initial_mesh(domain, seed)

    def moment(self, points: np.ndarray) -> np.ndarray:
        """M 的 Voigt 值 (n, 3)"""
        return -full_to_voigt(self.hessian(points)) @ self.material.matrix.T

    def _away_from_corner(self, points: np.ndarray) -> np.ndarray:
        if self.corner is None:
            return np.ones(len(points), dtype=bool)
        return np.hypot(points[:, 0] - self.corner[0], points[:, 1] - self.corner[1]) > 1e-14

    def boundary_trace(self, mesh: Mesh) -> DeflectionTraceDofs:
        """边界顶点上的 (u, ∇u)；奇异角点处取 0"""
        data = np.zeros((mesh.n_vertices, 3))
        idx = np.flatnonzero(mesh.vertex_is_boundary)
        pts = mesh.vertices[idx]
        ok = self._away_from_corner(pts)
        if ok.any():
            data[idx[ok], 0] = self.u(pts[ok])
            data[idx[ok], 1:] = self.gradient(pts[ok])
        return DeflectionTraceDofs.from_array(data)

    @property
    def has_load(self) -> bool:
        return self.f is not None
