"""
Worker pool for slab enumeration and grid sweeps.
Results always come back in submission order, whatever the thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from config.settings import Config

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def resolve_threads(threads: Optional[int]) -> int:
    """Clamp the requested thread count to at least one."""
    if threads is None:
        threads = Config.DEFAULT_THREADS
    return max(1, int(threads))


def run_tasks(task: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None,
              label: str = 'tasks') -> List[R]:
    """
    Apply task to every item, in parallel when more than one thread is allowed.

    Args:
        task: Callable run once per item
        items: Work items
        threads: Parallelism cap (defaults to Config.DEFAULT_THREADS)
        label: Name used in progress logging

    Returns:
        List of results in the order of items
    """
    work = list(items)
    threads = resolve_threads(threads)
    total = len(work)

    if threads == 1 or total <= 1:
        results = []
        for current, item in enumerate(work, start=1):
            results.append(task(item))
            logger.debug(f"{label}: {current}/{total}")
        return results

    with ThreadPoolExecutor(max_workers=min(threads, total)) as pool:
        futures = [pool.submit(task, item) for item in work]
        results = []
        for current, future in enumerate(futures, start=1):
            results.append(future.result())
            logger.debug(f"{label}: {current}/{total}")
    return results


def split_range(lo: int, hi: int, parts: int) -> List[range]:
    """Split the closed integer range [lo, hi] into at most `parts` contiguous pieces."""
    size = hi - lo + 1
    if size <= 0:
        return []
    parts = max(1, min(parts, size))
    base, extra = divmod(size, parts)
    pieces, start = [], lo
    for index in range(parts):
        length = base + (1 if index < extra else 0)
        pieces.append(range(start, start + length))
        start += length
    return pieces
