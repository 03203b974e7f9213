import os
from concurrent.futures import ThreadPoolExecutor


def max_workers():
    """Thread cap from ``SWITCHRATE_THREADS`` (default 1, i.e. serial)."""
    try:
        n = int(os.environ.get("SWITCHRATE_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def pmap(fn, items):
    """Ordered map; threaded when more than one worker is allowed."""
    items = list(items)
    n = min(max_workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
