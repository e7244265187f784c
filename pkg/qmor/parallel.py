"""
Worker pool for parameter sweeps

Threads rather than processes: the heavy lifting happens inside numpy FFT
and LAPACK calls, which release the GIL, and grids/components are shared
without pickling.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: Optional[int]) -> int:
    """0 or None means one worker per CPU"""
    if not workers:
        return max(1, os.cpu_count() or 1)
    return max(1, int(workers))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = 1) -> List[R]:
    """Ordered map; runs inline when a single worker is requested"""
    items = list(items)
    n = min(resolve_workers(workers), max(1, len(items)))
    if n == 1:
        return [fn(item) for item in items]
    logger.debug(f"Mapping {len(items)} item(s) over {n} worker threads")
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
