"""
Worker pool and fixed-shape reductions.

Results never depend on the number of threads: maps return values in input
order and every reduction runs over fixed blocks combined by a fixed pairwise
tree.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar
import logging

import numpy as np

from src.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

REDUCTION_BLOCK = 4096

_default_threads = max(1, settings.DEFAULT_THREADS)


def set_default_threads(threads: int) -> None:
    global _default_threads
    _default_threads = max(1, int(threads))
    logger.debug(f"Default worker count set to {_default_threads}")


def get_default_threads() -> int:
    return _default_threads


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> List[R]:
    items = list(items)
    threads = threads or _default_threads
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))


def tree_sum(values: Iterable):
    """Pairwise sum whose tree shape depends only on the number of values."""
    level = list(values)
    if not level:
        return 0.0
    while len(level) > 1:
        paired = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0]


def block_sum(array: np.ndarray, axis: int = -1):
    """
    Sums along an axis in fixed blocks of REDUCTION_BLOCK entries, then
    combines the block sums with `tree_sum`.
    """
    array = np.asarray(array)
    length = array.shape[axis]
    if length == 0:
        return np.sum(array, axis=axis)
    partials = [
        np.sum(np.take(array, np.arange(start, min(start + REDUCTION_BLOCK, length)), axis=axis), axis=axis)
        for start in range(0, length, REDUCTION_BLOCK)
    ]
    return tree_sum(partials)
