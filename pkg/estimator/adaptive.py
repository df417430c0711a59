"""
SOLVE → ESTIMATE → MARK → REFINE
"""
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from config import BUDGET_DOFS, BULK_THETA, CORNER_RADIUS, DEFAULT_LEVELS
from dpg.scheme import Scheme
from dpg.solver import solve_problem
from estimator.indicators import estimate
from estimator.marking import mark
from mesh.refinement import refine, refine_uniform
from mesh.triangulation import Mesh
from problems.base import ManufacturedSolution
from problems.errors import measure_errors
from utils.logger import log_stage, logger

REFINE_MODES = ("uniform", "adaptive")


@dataclass
class LevelRecord:
    level: int
    ndof: int
    n_elements: int
    h_max: float
    eta: float
    err_u: float
    err_theta: Optional[float]
    err_M: float
    wall_ms: float
    marked: List[int] = field(default_factory=list)
    corner_fraction: Optional[float] = None
    corner_density: Optional[float] = None

    def row(self) -> dict:
        """CSV 行"""
        data = asdict(self)
        for key in ("marked", "corner_fraction", "corner_density", "n_elements"):
            data.pop(key)
        return data


def corner_fraction(mesh: Mesh, marked: np.ndarray, corner, radius: float = CORNER_RADIUS) -> Optional[float]:
    """被标记单元中重心距角点小于 radius 的比例"""
    if corner is None or len(marked) == 0:
        return None
    c = mesh.centroids[marked]
    r = np.hypot(c[:, 0] - corner[0], c[:, 1] - corner[1])
    return float(np.mean(r < radius))


def corner_density_ratio(mesh: Mesh, corner, radius: float = CORNER_RADIUS) -> Optional[float]:
    """角点附近与其余区域的单元密度（个数 / 面积）之比，按重心归类

    网格向角点分级时远大于 1；任一侧没有单元时返回 None
    """
    if corner is None:
        return None
    c = mesh.centroids
    near = np.hypot(c[:, 0] - corner[0], c[:, 1] - corner[1]) < radius
    if near.all() or not near.any():
        return None
    areas = mesh.areas
    inside = near.sum() / areas[near].sum()
    outside = (~near).sum() / areas[~near].sum()
    return float(inside / outside)


def adaptive_loop(problem: ManufacturedSolution, scheme: Scheme, refine_mode: str = "adaptive",
                  levels: int = DEFAULT_LEVELS, budget_dofs: int = BUDGET_DOFS, theta: float = BULK_THETA,
                  threads: int = 1, mesh: Optional[Mesh] = None) -> List[LevelRecord]:
    """逐层求解并记录；达到层数或自由度预算、或 η = 0 时停止"""
    if refine_mode not in REFINE_MODES:
        raise ValueError(f"未知加密方式 {refine_mode}，可选 {REFINE_MODES}")
    if levels < 1:
        raise ValueError("层数至少为 1")
    mesh = mesh if mesh is not None else problem.initial_mesh()
    records: List[LevelRecord] = []
    for level in range(levels):
        with log_stage(f"[{refine_mode}] level {level}") as timer:
            solution = solve_problem(mesh, scheme, problem, threads=threads)
            with log_stage("误差估计"):
                indicators = estimate(solution.system, solution.coefficients, threads=threads)
            errors = measure_errors(mesh, solution.coefficients, problem)
        wall_ms = timer.ms

        record = LevelRecord(
            level=level, ndof=solution.ndof, n_elements=mesh.n_triangles, h_max=mesh.h_max,
            eta=indicators.total, err_u=errors.err_u, err_theta=errors.err_theta, err_M=errors.err_M,
            wall_ms=wall_ms,
        )
        record.corner_density = corner_density_ratio(mesh, problem.corner)
        records.append(record)
        logger.info(f"[{refine_mode}] level {level}: ndof={record.ndof}, η={record.eta:.4e}, "
                     f"err_M={record.err_M:.4e}, h_max={record.h_max:.3e}")

        if level == levels - 1 or solution.ndof >= budget_dofs or indicators.total <= 1e-14:
            break
        if refine_mode == "adaptive":
            marked = mark(indicators.eta_squared, theta)
            record.marked = marked.tolist()
            record.corner_fraction = corner_fraction(mesh, marked, problem.corner)
            mesh = refine(mesh, marked)
        else:
            record.marked = list(range(mesh.n_triangles))
            mesh = refine_uniform(mesh)
    return records
