"""
日志工具：全局日志器与分阶段计时
"""
import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator

from config import LOG_FILE, LOG_LEVEL

CONSOLE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(pathname)s:%(lineno)d - %(message)s"


def setup_logger(name: str = "kirchhoff_dpg", level: str = None) -> logging.Logger:
    """设置日志器：控制台写 stderr（stdout 留给 CSV 与验证报告），文件记录 DEBUG"""
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel(logging.DEBUG)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level or LOG_LEVEL)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    logger.addHandler(console_handler)

    file_handler = logging.FileHandler(LOG_FILE, encoding="utf-8")
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    logger.addHandler(file_handler)

    return logger


class StageTimer:
    """计时结果，退出 with 块后 ms 有效"""

    def __init__(self, stage: str):
        self.stage = stage
        self.ms = 0.0


@contextmanager
def log_stage(stage: str, level: int = logging.DEBUG) -> Iterator[StageTimer]:
    """记录一个计算阶段（组装、求解、估计、加密）的耗时"""
    timer = StageTimer(stage)
    start = time.perf_counter()
    try:
        yield timer
    finally:
        timer.ms = (time.perf_counter() - start) * 1000.0
        logger.log(level, f"{stage}: {timer.ms:.1f} ms")


# 全局日志器
logger = setup_logger()
