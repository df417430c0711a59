"""
子命令实现：solve、fortin-verify、slopes
"""
from pathlib import Path
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from cli.schemas import FortinConfig, RunConfig, SlopeConfig
from dpg.scheme import MaterialTensor, Scheme
from estimator.adaptive import adaptive_loop
from fortin.certify import run_fortin_certification
from problems import get_problem
from utils.error_handler import EXIT_FAILURE, EXIT_OK
from utils.logger import logger

CSV_COLUMNS = ["level", "ndof", "h_max", "eta", "err_u", "err_theta", "err_M", "wall_ms"]
SLOPE_AXES = {"ndof": "ndof", "h": "h_max"}


def _output_path(out: Path, mode: str, n_modes: int) -> Path:
    if n_modes == 1:
        return out
    return out.with_name(f"{out.stem}_{mode}{out.suffix or '.csv'}")


def cmd_solve(config: RunConfig) -> Dict[str, pd.DataFrame]:
    """逐层求解，每种加密方式一张表；给定 --out 时写 CSV"""
    material = MaterialTensor.isotropic(config.poisson) if config.poisson else MaterialTensor.identity()
    scheme = Scheme.theta(material) if config.scheme == "theta" else Scheme.plain(config.plain_tensor_degree, material)
    problem = get_problem(config.problem, material)
    logger.info(f"solve: problem={config.problem}, scheme={config.scheme}, refine={config.refine}, "
                f"levels={config.levels}, budget={config.budget_dofs}, ϑ={config.theta_mark}")

    tables: Dict[str, pd.DataFrame] = {}
    modes = config.refine_modes
    for mode in modes:
        records = adaptive_loop(problem, scheme, refine_mode=mode, levels=config.levels,
                                budget_dofs=config.budget_dofs, theta=config.theta_mark,
                                threads=config.threads)
        table = pd.DataFrame([r.row() for r in records], columns=CSV_COLUMNS)
        tables[mode] = table
        if config.out is not None:
            path = _output_path(config.out, mode, len(modes))
            path.parent.mkdir(parents=True, exist_ok=True)
            table.to_csv(path, index=False)
            logger.info(f"[{mode}] 写出 {len(table)} 行到 {path}")
    return tables


def cmd_fortin_verify(config: FortinConfig) -> Tuple[str, int]:
    """全套 Fortin 验证，返回报告文本与退出码"""
    report = run_fortin_certification(tolerance=config.tolerance, samples=config.samples,
                                      seed=config.seed, mode=config.mode, corrupt=config.inject_fault)
    return report.to_text(), EXIT_OK if report.passed else EXIT_FAILURE


def compute_slope(x: np.ndarray, y: np.ndarray, window: int = None) -> float:
    """log y 对 log x 的最小二乘斜率，只用最后 window 个点"""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x 与 y 需为等长一维数组")
    if window is not None:
        x, y = x[-window:], y[-window:]
    if len(x) < 2:
        raise ValueError("拟合斜率至少需要两个点")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("对数拟合要求数据为正的有限值")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def cmd_slopes(config: SlopeConfig) -> float:
    """CSV 中某一列相对 ndof（或 h_max）的对数斜率"""
    if not config.csv.exists():
        raise FileNotFoundError(f"找不到 {config.csv}")
    try:
        table = pd.read_csv(config.csv)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ValueError(f"CSV 格式错误: {e}") from e
    axis = SLOPE_AXES[config.against]
    for column in (axis, config.column):
        if column not in table.columns:
            raise ValueError(f"CSV 缺少列 {column}，现有 {list(table.columns)}")
    if len(table) < 3:
        raise ValueError(f"拟合斜率至少需要 3 行，当前 {len(table)} 行")
    slope = compute_slope(table[axis].to_numpy(), table[config.column].to_numpy(), config.window)
    logger.info(f"{config.column} 相对 {axis} 的斜率 (最后 {config.window} 行): {slope:.4f}")
    return slope
