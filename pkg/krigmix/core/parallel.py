"""
Ordered thread-pool map

Workers only run pure evaluations; results come back in input order so the
outcome never depends on the worker count.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from .config import settings

T = TypeVar("T")
R = TypeVar("R")


def worker_count(workers: Optional[int] = None) -> int:
    """Resolve the worker count: explicit value, then KRIG_THREADS, then CPU count"""
    if workers is None:
        workers = settings.THREADS
    if workers is None:
        workers = os.cpu_count() or 1
    return max(1, int(workers))


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    workers: Optional[int] = None,
) -> List[R]:
    items = list(items)
    count = min(worker_count(workers), len(items))
    if count <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=count) as pool:
        return list(pool.map(fn, items))
