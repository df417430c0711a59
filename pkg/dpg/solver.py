"""
全局求解与试探系数
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from config import SOLVER_RESIDUAL_MAX, SOLVER_RESIDUAL_TOL
from dpg.assembly import DpgSystem, assemble
from dpg.scheme import VOIGT_WEIGHT, Scheme
from mesh.triangulation import Mesh
from traces.deflection import DeflectionTraceDofs
from traces.moment import MomentTraceDofs
from utils.error_handler import SolverError
from utils.logger import log_stage, logger


def solve(A: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Jacobi 缩放后做稀疏 LU，检查相对残差"""
    A = sp.csc_matrix(A)
    rhs = np.asarray(rhs, dtype=float)
    if A.shape[0] != A.shape[1] or A.shape[0] != len(rhs):
        raise ValueError(f"矩阵形状 {A.shape} 与右端项长度 {len(rhs)} 不匹配")
    if A.shape[0] == 0:
        return np.zeros(0)
    diag = A.diagonal()
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise SolverError(f"矩阵不是正定的：{int(np.sum(diag <= 0))} 个非正对角元")
    s = 1.0 / np.sqrt(diag)
    S = sp.diags(s)
    try:
        lu = splu(sp.csc_matrix(S @ A @ S))
    except RuntimeError as e:
        raise SolverError(f"稀疏分解失败: {e}") from e
    x = s * lu.solve(s * rhs)
    if not np.all(np.isfinite(x)):
        raise SolverError("解向量含非有限值")

    norm_rhs = np.linalg.norm(rhs)
    if norm_rhs == 0.0:
        return x
    residual = float(np.linalg.norm(A @ x - rhs) / norm_rhs)
    if residual > SOLVER_RESIDUAL_MAX:
        raise SolverError(f"相对残差 {residual:.3e} 超过上限 {SOLVER_RESIDUAL_MAX:.1e}")
    if residual > SOLVER_RESIDUAL_TOL:
        logger.warning(f"相对残差 {residual:.3e} 高于 {SOLVER_RESIDUAL_TOL:.1e}")
    return x


@dataclass
class TrialCoefficients:
    """分片常数场与骨架迹"""
    u: np.ndarray
    theta: Optional[np.ndarray]
    M: np.ndarray
    uhat: DeflectionTraceDofs
    qhat: MomentTraceDofs
    x: np.ndarray

    @classmethod
    def from_vector(cls, system: DpgSystem, x: np.ndarray) -> "TrialCoefficients":
        mesh, layout, scheme = system.mesh, system.layout, system.scheme
        fields, uhat_free, qhat_free = layout.split(x)
        fields = fields.reshape(mesh.n_triangles, scheme.n_fields)
        trial = scheme.trial_layout

        uhat = system.boundary.boundary_only(mesh).as_array()
        uhat[mesh.interior_vertices] = uhat_free.reshape(-1, 3)
        return cls(
            u=fields[:, trial["u"]].ravel().copy(),
            theta=fields[:, trial["theta"]].copy() if scheme.has_theta else None,
            M=fields[:, trial["M"]].copy(),
            uhat=DeflectionTraceDofs.from_array(uhat),
            qhat=MomentTraceDofs.from_free(mesh, qhat_free),
            x=np.asarray(x, dtype=float).copy(),
        )

    @classmethod
    def zeros(cls, system: DpgSystem) -> "TrialCoefficients":
        return cls.from_vector(system, np.zeros(system.ndof))


@dataclass
class Solution:
    system: DpgSystem
    coefficients: TrialCoefficients
    solve_ms: float

    @property
    def mesh(self) -> Mesh:
        return self.system.mesh

    @property
    def ndof(self) -> int:
        return self.system.ndof


def solve_system(system: DpgSystem) -> TrialCoefficients:
    return TrialCoefficients.from_vector(system, solve(system.A, system.rhs))


def solve_problem(mesh: Mesh, scheme: Scheme, problem, threads: int = 1) -> Solution:
    """组装并求解；problem 需提供 f 与 boundary_trace(mesh)"""
    with log_stage("组装") as assembly_timer:
        system = assemble(mesh, scheme, problem.f, problem.boundary_trace(mesh), threads=threads)
    with log_stage("求解") as solve_timer:
        coefficients = solve_system(system)
    elapsed = assembly_timer.ms + solve_timer.ms
    logger.info(f"求解完成: ndof={system.ndof}, 用时 {elapsed:.0f} ms")
    return Solution(system, coefficients, elapsed)


@dataclass
class ConsistencyReport:
    u_difference: float
    M_difference: float


def field_difference(mesh: Mesh, a: TrialCoefficients, b: TrialCoefficients) -> ConsistencyReport:
    """分片常数 u、M 差的 L2 范数"""
    areas = mesh.areas
    du = a.u - b.u
    dM = a.M - b.M
    m_sq = np.einsum("ti,ij,tj->t", dM, VOIGT_WEIGHT, dM)
    return ConsistencyReport(float(np.sqrt(areas @ du**2)), float(np.sqrt(areas @ m_sq)))


def scheme_consistency_check(mesh: Mesh, problem, plain_degree: int = 4, threads: int = 1) -> ConsistencyReport:
    """两种格式在同一网格上的 u、M 之差"""
    material = getattr(problem, "material", None)
    theta = solve_problem(mesh, Scheme.theta(material), problem, threads)
    plain = solve_problem(mesh, Scheme.plain(plain_degree, material), problem, threads)
    report = field_difference(mesh, theta.coefficients, plain.coefficients)
    logger.info(f"格式一致性: ‖Δu‖={report.u_difference:.3e}, ‖ΔM‖={report.M_difference:.3e}")
    return report
