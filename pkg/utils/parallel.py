"""
Module: utils.parallel
Description:
    Thread-pool helpers. Results always come back in input order so that every
    join is deterministic regardless of scheduling.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from dotenv import load_dotenv

logger = logging.getLogger(__name__)
load_dotenv()

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(requested: Optional[int] = None) -> int:
    """
    Resolves the worker count from an explicit request or ``MAXFUN_THREADS``.

    0 (or unset) means one worker per CPU.

    Raises:
        ValueError: If the environment value is not a non-negative integer.
    """
    if requested is None:
        raw = os.getenv("MAXFUN_THREADS", "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError:
            logger.error(f"[Parallel] MAXFUN_THREADS is not an integer: {raw!r}")
            raise ValueError(f"BAD_THREAD_COUNT: {raw!r}")
    if requested < 0:
        raise ValueError(f"BAD_THREAD_COUNT: {requested}")
    return requested or (os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Applies ``fn`` to every item, concurrently when more than one worker is allowed."""
    items = list(items)
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
