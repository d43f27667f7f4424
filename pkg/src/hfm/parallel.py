"""Order-preserving map over a process pool.

Results come back in task order, so any reduction done by the caller is fixed
regardless of how the pool schedules the work.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def pmap(fn: Callable[[T], R], tasks: Iterable[T], workers: int = 1) -> list[R]:
    tasks = list(tasks)
    if workers < 1:
        raise ValueError("workers must be a positive integer")
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunksize = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks, chunksize=chunksize))
