"""Order-preserving parallel map controlled by ``TWISTKIT_WORKERS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    raw = os.environ.get("TWISTKIT_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"TWISTKIT_WORKERS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"TWISTKIT_WORKERS must be a positive integer, got {raw!r}")
    return n


def pmap(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """``[fn(x) for x in items]``, possibly on a thread pool; result order is input order."""
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
