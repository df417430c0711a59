"""
分片常数场的 L2 误差

触及奇异角点的单元先向角点做几何细分再积分
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from config import CORNER_SUBDIVISION_LEVELS, ERROR_QUAD_DEGREE
from dpg.scheme import VOIGT_WEIGHT
from dpg.solver import TrialCoefficients
from mesh.triangulation import Mesh
from poly.quadrature import quadrature
from problems.base import ManufacturedSolution


@dataclass
class FieldErrors:
    err_u: float
    err_theta: Optional[float]
    err_M: float

    def as_dict(self) -> dict:
        return {"err_u": self.err_u, "err_theta": self.err_theta, "err_M": self.err_M}


def corner_subdivision(triangle: np.ndarray, corner_index: int, levels: int) -> List[np.ndarray]:
    """向顶点 corner_index 做 levels 层几何细分：每层内三角形减半，外梯形剖成两个三角形"""
    c = triangle[corner_index]
    a = triangle[(corner_index + 1) % 3]
    b = triangle[(corner_index + 2) % 3]
    pieces = []
    for _ in range(levels):
        a_mid, b_mid = 0.5 * (c + a), 0.5 * (c + b)
        pieces.append(np.array([a_mid, a, b]))
        pieces.append(np.array([a_mid, b, b_mid]))
        a, b = a_mid, b_mid
    pieces.append(np.array([c, a, b]))
    return pieces


def _pieces(mesh: Mesh, t: int, corner, levels: int) -> List[np.ndarray]:
    X = mesh.vertices[mesh.triangles[t]]
    if corner is None or levels <= 0:
        return [X]
    hits = np.flatnonzero(np.hypot(X[:, 0] - corner[0], X[:, 1] - corner[1]) < 1e-14)
    if hits.size == 0:
        return [X]
    return corner_subdivision(X, int(hits[0]), levels)


def measure_errors(mesh: Mesh, coefficients: TrialCoefficients, exact: ManufacturedSolution,
                   quad_degree: int = ERROR_QUAD_DEGREE,
                   levels: int = CORNER_SUBDIVISION_LEVELS) -> FieldErrors:
    """‖u − u_h‖、‖∇u − θ_h‖、‖M − M_h‖"""
    rule = quadrature(quad_degree)
    ref = rule.points
    sq_u = sq_theta = sq_M = 0.0
    has_theta = coefficients.theta is not None
    for t in range(mesh.n_triangles):
        for piece in _pieces(mesh, t, exact.corner, levels):
            B = np.column_stack([piece[1] - piece[0], piece[2] - piece[0]])
            jac = abs(np.linalg.det(B))
            pts = ref @ B.T + piece[0]
            w = jac * rule.weights

            du = exact.u(pts) - coefficients.u[t]
            sq_u += float(w @ du**2)
            if has_theta:
                dtheta = exact.gradient(pts) - coefficients.theta[t]
                sq_theta += float(w @ np.einsum("qi,qi->q", dtheta, dtheta))
            dM = exact.moment(pts) - coefficients.M[t]
            sq_M += float(w @ np.einsum("qi,ij,qj->q", dM, VOIGT_WEIGHT, dM))
    return FieldErrors(
        err_u=float(np.sqrt(sq_u)),
        err_theta=float(np.sqrt(sq_theta)) if has_theta else None,
        err_M=float(np.sqrt(sq_M)),
    )


def exact_cell_means(mesh: Mesh, exact: ManufacturedSolution, quad_degree: int = ERROR_QUAD_DEGREE,
                     levels: int = CORNER_SUBDIVISION_LEVELS):
    """精确场的单元平均 (u, ∇u, M)"""
    rule = quadrature(quad_degree)
    u_mean = np.zeros(mesh.n_triangles)
    g_mean = np.zeros((mesh.n_triangles, 2))
    m_mean = np.zeros((mesh.n_triangles, 3))
    for t in range(mesh.n_triangles):
        for piece in _pieces(mesh, t, exact.corner, levels):
            B = np.column_stack([piece[1] - piece[0], piece[2] - piece[0]])
            pts = rule.points @ B.T + piece[0]
            w = abs(np.linalg.det(B)) * rule.weights
            u_mean[t] += w @ exact.u(pts)
            g_mean[t] += w @ exact.gradient(pts)
            m_mean[t] += w @ exact.moment(pts)
    areas = mesh.areas
    return u_mean / areas, g_mean / areas[:, None], m_mean / areas[:, None]
