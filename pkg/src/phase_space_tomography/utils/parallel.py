"""Deterministic thread-pool helpers."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from phase_space_tomography.constants import THREADS_ENV

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def _get_int_env(name: str, default: int) -> int:
    """Parse int env var with safe fallback."""
    try:
        return int(os.getenv(name, str(default)))
    except (TypeError, ValueError):
        return default


def max_workers() -> int:
    """Worker cap from TOMO_THREADS (at least 1)."""
    return max(1, _get_int_env(THREADS_ENV, os.cpu_count() or 1))


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """Apply fn to items on a thread pool; results come back in input order."""
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    logger.debug(f"Dispatching {len(items)} tasks to {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
