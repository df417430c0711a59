"""
参考单元上的 Fortin 算子构造与验证
"""
from fortin.dual_basis import DualBasisGG, build_dual_basis, build_dual_basis_gg
from fortin.ggrad import fortin_ggrad, fortin_ggrad_element
from fortin.saddle import SaddleSystem
from fortin.divdiv import (
    MODES, ddiv_operator, divdiv_vector_operator, fortin_ddiv, fortin_divdiv_vector,
)
from fortin.certify import (
    BoundednessReport, Certificate, CertificationReport, certify_constraint_ranks,
    orthogonality_residuals, random_affine_map, run_fortin_certification, verify_fortin_boundedness,
)

__all__ = [
    "DualBasisGG", "build_dual_basis", "build_dual_basis_gg",
    "fortin_ggrad", "fortin_ggrad_element", "SaddleSystem",
    "MODES", "ddiv_operator", "divdiv_vector_operator", "fortin_ddiv", "fortin_divdiv_vector",
    "BoundednessReport", "Certificate", "CertificationReport", "certify_constraint_ranks",
    "orthogonality_residuals", "random_affine_map", "run_fortin_certification",
    "verify_fortin_boundedness",
]
