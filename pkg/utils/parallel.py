"""Worker pool with deterministic result ordering."""

from typing import Callable, Iterable, Sequence, TypeVar

from joblib import Parallel, delayed

from config.settings import THREADS

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = THREADS) -> list[R]:
    """Apply ``func`` to every item, in input order.

    Args:
        func: Pure function of one item
        items: Inputs
        threads: Worker count; 1 runs inline

    Returns:
        list: Results in the same order as ``items``
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    return Parallel(n_jobs=threads, prefer="threads")(delayed(func)(item) for item in items)


def chunked(items: Sequence[T], chunks: int) -> list[Sequence[T]]:
    """Split a sequence into at most ``chunks`` contiguous slices."""
    if not items:
        return []
    chunks = max(1, min(chunks, len(items)))
    size = -(-len(items) // chunks)
    return [items[i : i + size] for i in range(0, len(items), size)]
