"""
多项式基、微分算子、L2 投影与数值积分
"""
from poly.fields import (
    FieldKind, PolyField, dim_p, monomial_exponents, eval_monomials,
    derivative_matrix, voigt_to_full, full_to_voigt, stack_fields,
)
from poly.basis import ScalarBasis, VectorBasis, SymTensorBasis
from poly.quadrature import QuadratureRule, quadrature, edge_quadrature
from poly.projection import l2_project, l2_inner, integrate, cell_integral

__all__ = [
    "FieldKind", "PolyField", "dim_p", "monomial_exponents", "eval_monomials",
    "derivative_matrix", "voigt_to_full", "full_to_voigt", "stack_fields",
    "ScalarBasis", "VectorBasis", "SymTensorBasis",
    "QuadratureRule", "quadrature", "edge_quadrature",
    "l2_project", "l2_inner", "integrate", "cell_integral",
]
