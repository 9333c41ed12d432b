"""Thread fan-out with results returned in input order.

Callers reduce the returned list sequentially, so every result is
independent of the number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "KPLANE_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn, items, threads: int | None = None) -> list:
    items = list(items)
    threads = default_threads() if threads is None else threads
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
