"""
单元级任务池

逐单元计算（局部 Gram、耦合矩阵、误差指示子）互不依赖，
用线程池并行；结果按单元编号收集，保证输出与线程数无关
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, TypeVar

from utils.logger import logger

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class PoolStats:
    """任务统计"""
    submitted: int = 0
    batches: int = 0
    workers: int = 1
    history: List[int] = field(default_factory=list)


class ElementTaskPool:
    """单元任务池

    threads == 1 时直接串行执行，不创建线程
    """

    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError(f"线程数至少为 1，当前为 {threads}")
        self.threads = threads
        self.stats = PoolStats(workers=threads)
        self._executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> "ElementTaskPool":
        if self.threads > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.threads)
            logger.debug(f"任务池启动，{self.threads} 个 worker 就绪")
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()

    def map(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """按输入顺序返回结果"""
        items = list(items)
        self.stats.submitted += len(items)
        self.stats.batches += 1
        self.stats.history.append(len(items))
        if self._executor is None:
            return [func(item) for item in items]
        return list(self._executor.map(func, items))

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
            logger.debug("任务池已停止")


def run_elements(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """一次性任务：创建、执行、关闭"""
    with ElementTaskPool(threads) as pool:
        return pool.map(func, items)
