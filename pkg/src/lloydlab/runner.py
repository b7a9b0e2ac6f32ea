"""Deterministic realization-parallel Monte Carlo.

Realization ``r`` always draws from the stream ``RandomStream(seed, r)``, tasks
run with BLAS pinned to one thread, and results are gathered in realization
order before any reduction. Output is therefore independent of the worker
count and of completion order.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits


def _run_chunk(func: Callable, indices: Sequence[int]):
    with threadpool_limits(limits=1):
        return [func(r) for r in indices]


def map_realizations(func: Callable, n: int, workers: int = 1, chunks_per_worker: int = 4):
    """``[func(0), ..., func(n-1)]``, evaluated on ``workers`` processes.

    ``func`` must be picklable (a module-level function or a
    :func:`functools.partial` of one) when ``workers > 1``.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or n <= 1:
        return _run_chunk(func, range(n))
    n_chunks = min(n, workers * chunks_per_worker)
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    chunks = [range(bounds[i], bounds[i + 1]) for i in range(n_chunks)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, [func] * n_chunks, chunks))
    return [item for part in parts for item in part]


def pairwise_sum(values: np.ndarray) -> np.ndarray:
    """Sum along axis 0 by a fixed balanced binary tree."""
    values = np.asarray(values)
    if values.shape[0] == 0:
        return np.zeros(values.shape[1:], dtype=values.dtype)
    while values.shape[0] > 1:
        if values.shape[0] % 2:
            head = values[:-1:2] + values[1::2]
            values = np.concatenate([head, values[-1:]], axis=0)
        else:
            values = values[0::2] + values[1::2]
    return values[0]


def mean_and_stderr(values: np.ndarray):
    """Mean over axis 0 and its standard error.

    For complex input the real and imaginary standard errors are combined as a
    Euclidean norm. With a single sample the standard error is NaN; entries
    that are identical across samples get exactly zero.
    """
    values = np.asarray(values)
    R = values.shape[0]
    mean = pairwise_sum(values) / R
    if R < 2:
        return mean, np.full(np.shape(mean), np.nan)
    # deterministic entries keep their exact value and a zero error
    same = np.all(values == values[:1], axis=0)
    mean = np.where(same, values[0], mean)
    dev = values - mean
    if np.iscomplexobj(values):
        var = pairwise_sum(dev.real ** 2 + dev.imag ** 2) / (R - 1)
    else:
        var = pairwise_sum(dev ** 2) / (R - 1)
    return mean, np.sqrt(var / R)
