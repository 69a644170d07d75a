"""Seeded substreams for reproducible, parallel ensemble generation.

Generator: numpy ``PCG64``.  Realisations are grouped into fixed blocks of
``BLOCK_SIZE`` matrices and block ``k`` of a run seeded with ``seed`` always
draws from ``SeedSequence(seed, spawn_key=(k,))``.  Output therefore does not
depend on how many workers process the blocks, or in which order.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .exceptions import InvalidParameterError

BLOCK_SIZE = 4096
THREADS_ENV = "CIRC_SPECTRA_THREADS"


def as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer, np.random.SeedSequence)):
        return np.random.Generator(np.random.PCG64(rng))
    raise InvalidParameterError(f"cannot build a random generator from {type(rng).__name__}")


def block_generator(seed, block):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.PCG64(ss))


def worker_count(n_threads=None):
    if n_threads is None:
        env = os.environ.get(THREADS_ENV)
        n_threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(n_threads))


def block_sizes(m, block_size=BLOCK_SIZE):
    full, rest = divmod(int(m), block_size)
    return [block_size] * full + ([rest] if rest else [])


def map_blocks(fn, seed, m, n_threads=None, block_size=BLOCK_SIZE):
    """Yield ``fn(rng_k, size_k)`` for every block, in block order.

    Blocks are computed lazily in windows of ``n_threads`` so that streaming
    callers never hold more than a few blocks in memory.
    """
    if seed is None:
        raise InvalidParameterError("ensemble generation requires an explicit integer seed")
    sizes = block_sizes(m, block_size)
    workers = worker_count(n_threads)
    if workers == 1 or len(sizes) == 1:
        for k, size in enumerate(sizes):
            yield fn(block_generator(seed, k), size)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for start in range(0, len(sizes), workers):
            window = range(start, min(start + workers, len(sizes)))
            futures = [pool.submit(fn, block_generator(seed, k), sizes[k]) for k in window]
            for fut in futures:
                yield fut.result()
