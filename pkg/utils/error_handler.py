"""
统一错误处理：异常层次与装饰器
"""
from functools import wraps
from typing import Callable, Any, Optional

from pydantic import ValidationError

from utils.logger import logger


class PlateDpgError(Exception):
    """本项目所有可预期失败的基类"""


class MeshError(PlateDpgError):
    """网格拓扑错误：非协调、方向不一致、覆盖不完整"""


class DegenerateElementError(PlateDpgError):
    """退化单元或方向为负的仿射映射"""


class QuadratureError(PlateDpgError):
    """不支持的积分精确度"""


class AssemblyError(PlateDpgError):
    """局部 Gram 矩阵分解失败"""

    def __init__(self, message: str, element: Optional[int] = None):
        super().__init__(message)
        self.element = element


class SolverError(PlateDpgError):
    """全局线性系统分解失败或残差过大"""


class RootFindingError(PlateDpgError):
    """角点指数方程在区间内无根"""


class CertificationError(PlateDpgError):
    """Fortin 约束块秩亏"""

    def __init__(self, message: str, block: str):
        super().__init__(message)
        self.block = block


# 退出码
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def handle_sync_errors(func: Callable) -> Callable:
    """
    同步函数的错误处理装饰器

    Usage:
        @handle_sync_errors
        def my_function(...):
            ...
    """
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except Exception as e:
            logger.error(f"{func.__name__} 执行失败: {e}", exc_info=True)
            raise
    return wrapper


def handle_cli_errors(func: Callable[..., int]) -> Callable[..., int]:
    """
    命令行入口的错误处理装饰器

    把异常统一映射为退出码，避免在每个子命令里重复 try-except：
    参数/输入错误 -> 2，运行阶段失败 -> 1
    """
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> int:
        try:
            return func(*args, **kwargs)
        except (ValidationError, ValueError, FileNotFoundError) as e:
            logger.error(f"{func.__name__} 参数错误: {e}")
            return EXIT_USAGE
        except PlateDpgError as e:
            logger.error(f"{func.__name__} 执行失败: {e}", exc_info=True)
            return EXIT_FAILURE
        except Exception as e:
            logger.error(f"{func.__name__} 未预期的错误: {e}", exc_info=True)
            return EXIT_FAILURE
    return wrapper
