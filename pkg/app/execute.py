"""Runs a function over many argument tuples, optionally in child processes.

Child processes are started with the 'spawn' method, so `function` must be
defined with `def` at the top level of a module and its arguments and return
values must be picklable.
"""
import concurrent.futures
import dataclasses
import logging
import multiprocessing
import typing

import torch

logger = logging.getLogger(__name__)


class Error(Exception):
    pass


class WorkerError(Error):
    pass


@dataclasses.dataclass
class ProcessResult:
    return_value: typing.Any = None
    exception: Exception = None

    def was_successful(self) -> bool:
        return self.exception is None


def _init_worker():
    # Parallelism comes from the processes; one thread each avoids
    # oversubscribing the cores.
    torch.set_num_threads(1)


def call_with_result(function, args):
    """Calls `function(*args)` and captures its outcome in a ProcessResult.

    Exceptions are wrapped in a WorkerError, since package errors with
    custom constructors cannot always cross a process boundary.
    """
    result = ProcessResult()
    try:
        result.return_value = function(*args)
    except Exception as e:  # pylint: disable=broad-exception-caught
        result.exception = WorkerError(f'{type(e).__name__}: {e}')
    return result


def map_with_results(function, args_list, workers=1):
    """Applies `function` to every argument tuple.

    Args:
        function: The function to call, once per tuple in `args_list`.
        args_list: A list of argument tuples.
        workers: Number of child processes; 1 or less runs everything in the
            calling process.

    Returns:
        A list of ProcessResult objects in the order of `args_list`.
    """
    args_list = list(args_list)
    if workers <= 1 or len(args_list) <= 1:
        return [call_with_result(function, args) for args in args_list]
    workers = min(workers, len(args_list))
    logger.info('Running %d jobs on %d worker processes', len(args_list),
                workers)
    with concurrent.futures.ProcessPoolExecutor(
            max_workers=workers,
            mp_context=multiprocessing.get_context('spawn'),
            initializer=_init_worker) as pool:
        futures = [
            pool.submit(call_with_result, function, args) for args in args_list
        ]
        return [future.result() for future in futures]


def raise_first_failure(results):
    """Returns the return values, or raises the first captured exception."""
    for result in results:
        if not result.was_successful():
            raise result.exception
    return [result.return_value for result in results]
