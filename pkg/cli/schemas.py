"""
命令行参数模型
"""
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from config import (
    BUDGET_DOFS, BULK_THETA, DEFAULT_LEVELS, FORTIN_MODE, FORTIN_SAMPLES, FORTIN_TOLERANCE, RANDOM_SEED,
)


class RunConfig(BaseModel):
    """solve 子命令的运行配置"""
    scheme: Literal["theta", "plain"] = "theta"
    refine: Literal["uniform", "adaptive", "both"] = "both"
    problem: Literal["singular", "smooth", "zero"] = "singular"
    levels: int = Field(DEFAULT_LEVELS, ge=1, le=30)
    budget_dofs: int = Field(BUDGET_DOFS, ge=1)
    theta_mark: float = Field(BULK_THETA, gt=0.0, le=1.0)
    out: Optional[Path] = None
    threads: int = Field(1, ge=1, le=256)
    plain_tensor_degree: Literal[2, 4] = 4
    poisson: float = Field(0.0, gt=-1.0, le=0.5)

    @model_validator(mode="after")
    def _check_combination(self) -> "RunConfig":
        if self.problem == "singular" and self.poisson != 0.0:
            raise ValueError("奇异问题只支持 ℂ = identity（poisson = 0）")
        return self

    @property
    def refine_modes(self):
        return ("uniform", "adaptive") if self.refine == "both" else (self.refine,)


class FortinConfig(BaseModel):
    """fortin-verify 子命令的配置"""
    tolerance: float = Field(FORTIN_TOLERANCE, gt=0.0)
    samples: int = Field(FORTIN_SAMPLES, ge=1)
    seed: int = RANDOM_SEED
    mode: Literal["distance", "norm"] = FORTIN_MODE
    inject_fault: Optional[Literal["dual_basis", "divdiv_vector", "ddiv"]] = None


class SlopeConfig(BaseModel):
    """slopes 子命令的配置"""
    csv: Path
    column: str = "eta"
    window: int = Field(3, ge=2)
    against: Literal["ndof", "h"] = "ndof"
