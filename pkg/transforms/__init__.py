"""
参考单元与物理单元之间的场变换
"""
from transforms.piola import (
    TransformKind, KIND_OF_FIELD,
    push, push_scalar, push_vector, push_tensor,
    pull, pull_scalar, pull_vector, pull_tensor,
)
from transforms.identities import (
    IdentityResiduals, verify_divdiv_identity, verify_divdiv_vector_identity, norm_scaling_ratios,
)

__all__ = [
    "TransformKind", "KIND_OF_FIELD",
    "push", "push_scalar", "push_vector", "push_tensor",
    "pull", "pull_scalar", "pull_vector", "pull_tensor",
    "IdentityResiduals", "verify_divdiv_identity", "verify_divdiv_vector_identity", "norm_scaling_ratios",
]
