"""Thread-pool map honoring the JOSTLAB_THREADS cap.

Grid evaluations and per-candidate refinements are independent pure
computations, so they may run on a pool; results are always collected in
input order, keeping every caller deterministic.  Unset or "1" means
serial; "0" means one worker per CPU.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_count", "pmap"]


def thread_count() -> int:
    raw = os.environ.get("JOSTLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def pmap(fn, items):
    """Map preserving input order; pooled only when the env cap allows it."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
