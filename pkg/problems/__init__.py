"""
制造解、边界数据与误差度量
"""
from dpg.scheme import MaterialTensor
from problems.base import ManufacturedSolution
from problems.errors import FieldErrors, corner_subdivision, exact_cell_means, measure_errors
from problems.singular import (
    DEFAULT_OPENING, SingularParams, corner_exponent_newton, eval_singular,
    shear_force_energy, shear_force_magnitude, singular_problem, solve_corner_exponent,
)
from problems.smooth import smooth_displacement, smooth_problem, zero_problem

PROBLEMS = {
    "singular": singular_problem,
    "smooth": smooth_problem,
    "zero": zero_problem,
}


def get_problem(name: str, material: MaterialTensor = None) -> ManufacturedSolution:
    if name not in PROBLEMS:
        raise ValueError(f"未知问题 {name}，可选 {sorted(PROBLEMS)}")
    return PROBLEMS[name](material=material)


__all__ = [
    "ManufacturedSolution", "FieldErrors", "corner_subdivision", "exact_cell_means", "measure_errors",
    "DEFAULT_OPENING", "SingularParams", "corner_exponent_newton", "eval_singular",
    "shear_force_energy", "shear_force_magnitude", "singular_problem", "solve_corner_exponent",
    "smooth_displacement", "smooth_problem", "zero_problem", "PROBLEMS", "get_problem",
]
