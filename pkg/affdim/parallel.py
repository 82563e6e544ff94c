"""
Ordered process-pool mapping.

Every enumerating operation splits its work into a task list that depends
only on the input (never on the number of workers), maps a module-level
function over it and merges the results in task order.  That keeps results
bit-identical whether one process or many did the work.
"""
from __future__ import absolute_import, print_function

import logging
import math
import multiprocessing

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *
    T = TypeVar('T')
    R = TypeVar('R')

_logger = logging.getLogger(__name__)

# set by the command line front end (-j/--workers)
default_processes = 1


def set_default_processes(processes):
    # type: (Optional[int]) -> int
    """
    Parameters
    ----------
    processes : Optional[int]
        number of worker processes; None or anything below 1 resets to 1

    Returns
    -------
    int
    """
    global default_processes
    default_processes = max(1, int(processes or 1))
    return default_processes


def ordered_map(func, tasks, processes=None):
    # type: (Callable[[T], R], Iterable[T], Optional[int]) -> List[R]
    """
    Apply `func` to every task and return the results in task order.

    Parameters
    ----------
    func : Callable[[T], R]
        must be picklable (a module-level function)
    tasks : Iterable[T]
    processes : Optional[int]
        defaults to the value set by `set_default_processes`

    Returns
    -------
    List[R]
    """
    tasks = list(tasks)
    if processes is None:
        processes = default_processes
    if processes <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]

    try:
        pool = multiprocessing.Pool(min(processes, len(tasks)))
    except (ImportError, OSError, NotImplementedError) as err:
        _logger.warning("process pool unavailable (%s); running serially",
                        err)
        return [func(task) for task in tasks]
    try:
        return pool.map(func, tasks)
    finally:
        pool.close()
        pool.join()


def log_sum(parts):
    # type: (Iterable[Tuple[float, float]]) -> float
    """
    Merge partial log-sum-exp results.

    Each part is ``(shift, total)`` meaning ``exp(shift) * total``.  Parts are
    merged in the order given with a correctly rounded sum.

    Parameters
    ----------
    parts : Iterable[Tuple[float, float]]

    Returns
    -------
    float
        log of the grand total (``-inf`` for an empty or all-zero sum)
    """
    parts = [(shift, total) for shift, total in parts if total > 0.0]
    if not parts:
        return float('-inf')
    top = max(shift for shift, _ in parts)
    return top + math.log(math.fsum(total * math.exp(shift - top)
                                    for shift, total in parts))
