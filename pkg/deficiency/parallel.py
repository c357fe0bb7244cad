"""
Order-preserving data-parallel map used for independent LP solves and trials.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from django.conf import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    return max(1, int(getattr(settings, "LECAM_THREADS", 1)))


def parallel_map(function: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply ``function`` to every item; results come back in input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [function(item) for item in items]
    logger.debug(f"Mapping {len(items)} tasks over {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, items))
