"""
DPG 残差误差指示子 η(T)² = r_Tᵀ G_T⁻¹ r_T
"""
from dataclasses import dataclass

import numpy as np

from dpg.assembly import DpgSystem
from dpg.solver import TrialCoefficients
from utils.task_queue import ElementTaskPool


@dataclass
class ErrorIndicators:
    eta_squared: np.ndarray

    @property
    def local(self) -> np.ndarray:
        """η(T)"""
        return np.sqrt(self.eta_squared)

    @property
    def total(self) -> float:
        """η = (Σ η(T)²)^{1/2}"""
        return float(np.sqrt(self.eta_squared.sum()))

    def __len__(self) -> int:
        return len(self.eta_squared)


def estimate(system: DpgSystem, coefficients: TrialCoefficients, threads: int = 1) -> ErrorIndicators:
    x = coefficients.x

    def local(t: int) -> float:
        return system.locals[t].residual_norm2(system.local_vector(x, t))

    with ElementTaskPool(threads) as pool:
        values = pool.map(local, range(system.mesh.n_triangles))
    return ErrorIndicators(np.array(values, dtype=float))
