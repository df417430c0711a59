"""
实用 DPG 方法：单元矩阵、法方程组装与求解
"""
from dpg.scheme import MaterialTensor, Scheme, SchemeKind, VOIGT_WEIGHT
from dpg.test_space import LocalTestSpace, divdiv_norm, divdiv_vector_norm, h2_norm
from dpg.local import LocalDpgSystem, local_b, local_gram, local_load
from dpg.assembly import DpgSystem, assemble, symmetry_defect
from dpg.solver import (
    ConsistencyReport, Solution, TrialCoefficients,
    scheme_consistency_check, solve, solve_problem, solve_system,
)

__all__ = [
    "MaterialTensor", "Scheme", "SchemeKind", "VOIGT_WEIGHT",
    "LocalTestSpace", "divdiv_norm", "divdiv_vector_norm", "h2_norm",
    "LocalDpgSystem", "local_b", "local_gram", "local_load",
    "DpgSystem", "assemble", "symmetry_defect",
    "ConsistencyReport", "Solution", "TrialCoefficients",
    "scheme_consistency_check", "solve", "solve_problem", "solve_system",
]
