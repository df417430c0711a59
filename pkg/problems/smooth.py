"""
光滑验证问题与零问题：单位正方形上的固支板
"""
import numpy as np

from dpg.scheme import MaterialTensor
from mesh.domains import unit_square, unit_square_grid
from poly.fields import PolyField
from problems.base import ManufacturedSolution


def _bubble_factor() -> dict:
    """t²(1−t)² = t² − 2t³ + t⁴ 的系数"""
    return {2: 1.0, 3: -2.0, 4: 1.0}


def smooth_displacement() -> PolyField:
    """u = x²(1−x)² y²(1−y)²，全局坐标下的多项式"""
    factor = _bubble_factor()
    terms = {(i, j): a * b for i, a in factor.items() for j, b in factor.items()}
    return PolyField.scalar(terms, degree=8)


def smooth_problem(material: MaterialTensor = None) -> ManufacturedSolution:
    """f = divDiv(ℂ ε∇u)，按系数精确求导"""
    material = material or MaterialTensor.identity()
    u = smooth_displacement()
    grad = u.grad()
    hess = u.hessian()
    load = material.apply(hess).divdiv()

    return ManufacturedSolution(
        name="smooth",
        domain_factory=unit_square_grid,
        u=lambda pts: u.eval_physical(pts),
        gradient=lambda pts: grad.eval_physical(pts),
        hessian=lambda pts: hess.tensor_values(np.atleast_2d(pts)),
        f=lambda pts: load.eval_physical(pts),
        material=material,
    )


def zero_problem(material: MaterialTensor = None) -> ManufacturedSolution:
    """u ≡ 0，f ≡ 0"""
    def zeros(pts):
        return np.zeros(len(np.atleast_2d(pts)))

    return ManufacturedSolution(
        name="zero",
        domain_factory=unit_square,
        u=zeros,
        gradient=lambda pts: np.zeros((len(np.atleast_2d(pts)), 2)),
        hessian=lambda pts: np.zeros((len(np.atleast_2d(pts)), 2, 2)),
        f=None,
        material=material or MaterialTensor.identity(),
    )
