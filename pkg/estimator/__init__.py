"""
误差估计、Dörfler 标记与自适应循环
"""
from estimator.indicators import ErrorIndicators, estimate
from estimator.marking import mark
from estimator.adaptive import REFINE_MODES, LevelRecord, adaptive_loop, corner_density_ratio, corner_fraction

__all__ = [
    "ErrorIndicators", "estimate", "mark",
    "REFINE_MODES", "LevelRecord", "adaptive_loop", "corner_density_ratio", "corner_fraction",
]
