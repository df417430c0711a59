"""
命令行：solve、fortin-verify、slopes
"""
from cli.schemas import FortinConfig, RunConfig, SlopeConfig
from cli.commands import CSV_COLUMNS, cmd_fortin_verify, cmd_slopes, cmd_solve, compute_slope

__all__ = [
    "FortinConfig", "RunConfig", "SlopeConfig",
    "CSV_COLUMNS", "cmd_fortin_verify", "cmd_slopes", "cmd_solve", "compute_slope",
]
