"""
骨架迹空间：挠度迹 Û_S 与弯矩迹 Q̂_S
"""
from traces.deflection import (
    BoundaryTraceP32, DeflectionTraceDofs, EdgeTrace, EdgeTraceBasis,
    edge_trace, edge_trace_basis, local_trace_of,
    pair_uhat_divdiv, pair_uhat_divdiv_vector, uhat_divdiv_pairing_matrix, uhat_pairing_matrix,
)
from traces.moment import (
    MomentTraceDofs, assemble_qhat_constraints, pair_qhat, qhat_functionals, qhat_nullspace_basis,
)
from traces.dofs import DofCounts, DofLayout, count_dofs

__all__ = [
    "BoundaryTraceP32", "DeflectionTraceDofs", "EdgeTrace", "EdgeTraceBasis",
    "edge_trace", "edge_trace_basis", "local_trace_of",
    "pair_uhat_divdiv", "pair_uhat_divdiv_vector", "uhat_divdiv_pairing_matrix", "uhat_pairing_matrix",
    "MomentTraceDofs", "assemble_qhat_constraints", "pair_qhat", "qhat_functionals", "qhat_nullspace_basis",
    "DofCounts", "DofLayout", "count_dofs",
]
