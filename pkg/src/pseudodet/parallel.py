"""Worker pools whose results never depend on the worker count."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence


def _scan(fn: Callable, items: Sequence, start: int, stop: int):
    for k in range(start, stop):
        if fn(items[k]):
            return k
    return None


def first_index(fn: Callable, items: Sequence, workers: int = 1, chunk: int = 64) -> int | None:
    """Smallest k with fn(items[k]) true, or None.

    With several workers the range is cut into chunks scanned in parallel and
    the minimum hit is taken, so the answer matches the sequential scan.
    """
    n = len(items)
    if workers <= 1 or n <= chunk:
        return _scan(fn, items, 0, n)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for base in range(0, n, chunk * workers):
            futs = [
                pool.submit(_scan, fn, items, s, min(s + chunk, n))
                for s in range(base, min(base + chunk * workers, n), chunk)
            ]
            hits = [f.result() for f in futs]
            found = [h for h in hits if h is not None]
            if found:
                return min(found)
    return None


def map_ordered(fn: Callable, items: Iterable, workers: int = 1) -> list:
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
