"""Bounded worker pool for independent replicas.

Each replica owns its own random stream, so results do not depend on the
number of workers.  The pool size is read from ``DISORDER_RMT_THREADS``.
"""
import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(requested=None) -> int:
    if requested is None:
        env = os.environ.get("DISORDER_RMT_THREADS", "")
        try:
            requested = int(env) if env else 1
        except ValueError:
            requested = 1
    return max(1, int(requested))


def map_replicas(fn, items, workers=None):
    """``[fn(x) for x in items]``, possibly on a thread pool, order preserved."""
    items = list(items)
    nw = min(worker_count(workers), len(items)) if items else 1
    if nw <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(fn, items))
