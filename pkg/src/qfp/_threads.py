"""Optional thread-pool evaluation of scan grids, capped by QFP_THREADS."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """Worker cap from the QFP_THREADS environment variable (default 1)."""
    raw = os.environ.get("QFP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


def map_grid(fn, items):
    """Map ``fn`` over ``items``, threaded when QFP_THREADS > 1."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
