"""
Worker pool helpers with a fixed reduction order.

Chunk boundaries depend only on the problem size, never on the worker
count, and partial results are combined by a fixed pairwise tree. Results
are therefore bit-identical for any number of workers.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_CHUNK = 4096


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Map fn over items, returning results in input order"""

    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def fixed_chunks(n: int, chunk: int = DEFAULT_CHUNK) -> list[slice]:
    """Split range(n) into consecutive slices of at most `chunk` elements"""

    if chunk < 1:
        raise ValueError(f"chunk must be positive, got {chunk}")
    return [slice(start, min(start + chunk, n)) for start in range(0, n, chunk)]


def tree_sum(values: Sequence) -> complex | np.ndarray:
    """
    Pairwise sum along the first axis in a fixed tree order.

    Args:
        values: Sequence of scalars or equally shaped arrays

    Returns:
        The sum, zero for an empty sequence
    """

    if len(values) == 0:
        return 0j
    level = np.asarray(values)
    while level.shape[0] > 1:
        if level.shape[0] % 2:
            level = np.concatenate([level, np.zeros_like(level[:1])])
        level = level[0::2] + level[1::2]
    return level[0]


def chunked_sum(
    fn: Callable[[slice], complex | np.ndarray],
    n: int,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> complex | np.ndarray:
    """
    Evaluate fn on fixed chunks of range(n) in parallel and tree-sum the results.

    fn receives a slice and returns the partial sum over it.
    """

    slices = fixed_chunks(n, chunk)
    partials = ordered_map(fn, slices, workers)
    return tree_sum(partials)
