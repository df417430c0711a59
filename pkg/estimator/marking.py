"""
Dörfler（bulk）标记
"""
import numpy as np

from config import BULK_THETA


def mark(eta_squared: np.ndarray, theta: float = BULK_THETA) -> np.ndarray:
    """最小贪心集合：按 η(T) 降序（同值按单元编号）累加到 θ·η²

    θ = 1 时标记所有 η(T) > 0 的单元
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"bulk 参数 {theta} 不在 (0, 1] 内")
    eta_squared = np.asarray(eta_squared, dtype=float)
    if np.any(eta_squared < 0):
        raise ValueError("误差指示子必须非负")
    total = eta_squared.sum()
    if total <= 0.0:
        return np.zeros(0, dtype=np.int64)
    if theta == 1.0:
        return np.flatnonzero(eta_squared > 0)
    order = np.argsort(-eta_squared, kind="stable")
    cumulative = np.cumsum(eta_squared[order])
    count = int(np.searchsorted(cumulative, theta * total * (1.0 - 1e-12))) + 1
    return np.sort(order[:count])
