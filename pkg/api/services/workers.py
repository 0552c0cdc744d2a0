"""
twistorkit workers
Ordered per-point parallel map sized by TWISTORKIT_THREADS.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def worker_threads() -> int:
    raw = os.getenv("TWISTORKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer TWISTORKIT_THREADS=%r", raw)
        return 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Results in input order, whatever the schedule."""
    items = list(items)
    threads = worker_threads()
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
