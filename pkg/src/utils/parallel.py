import multiprocessing
from contextlib import contextmanager
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, TypeVar

from threadpoolctl import threadpool_limits

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: int) -> int:
    """
    0 (or less) means one process per CPU
    """
    if threads <= 0:
        return multiprocessing.cpu_count()

    return threads


def _pinned_initializer(initializer: Optional[Callable], *initargs):
    # one BLAS thread per worker process, the pool already fills the CPUs
    threadpool_limits(limits=1)

    if initializer is not None:
        initializer(*initargs)


def pool_map(
    func: Callable[[T], R],
    items: Iterable[T],
    threads: int,
    initializer: Optional[Callable] = None,
    initargs: Sequence = (),
) -> List[R]:
    """
    Map ``func`` over ``items``, in worker processes when ``threads`` > 1

    Results always come back in submission order, so a parallel run
    reduces exactly like a serial one.
    """
    items = list(items)
    num_processes = min(resolve_threads(threads), max(len(items), 1))

    if num_processes <= 1:
        if initializer is not None:
            initializer(*initargs)

        return [func(item) for item in items]

    with multiprocessing.Pool(
        num_processes,
        initializer=_pinned_initializer,
        initargs=(initializer, *initargs),
    ) as pool:
        return pool.map(func, items)


@contextmanager
def worker_pool(
    threads: int,
    initializer: Optional[Callable] = None,
    initargs: Sequence = (),
) -> Iterator[Callable[[Callable[[T], R], Iterable[T]], List[R]]]:
    """
    A map function backed by one long-lived pool, for stages that fan out
    many times over the same worker state

    With a single process the map runs in the caller.
    """
    num_processes = resolve_threads(threads)

    if num_processes <= 1:
        if initializer is not None:
            initializer(*initargs)

        yield lambda func, items: [func(item) for item in items]
        return

    with multiprocessing.Pool(
        num_processes,
        initializer=_pinned_initializer,
        initargs=(initializer, *initargs),
    ) as pool:
        yield pool.map
