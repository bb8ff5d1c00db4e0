from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence, Tuple

import numpy as np

from .logger import get_logger

logger = get_logger(__name__)

SEED_MASK = (1 << 64) - 1


def single_rng(seed: int) -> np.random.Generator:
    """Generator for a single stand-alone path."""
    return np.random.default_rng(np.random.SeedSequence(seed & SEED_MASK))


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for path `index` of a seeded batch.

    Substreams are keyed by (seed, path index) through SeedSequence entropy, never by
    worker, so any split of a batch across workers draws identical paths.
    """
    return np.random.default_rng(np.random.SeedSequence([seed & SEED_MASK, index]))


def chunk_ranges(total: int, chunk_size: int) -> List[Tuple[int, int]]:
    """Split [0, total) into (start, count) chunks of at most chunk_size."""
    return [(start, min(chunk_size, total - start)) for start in range(0, total, chunk_size)]


def map_chunks(fn: Callable[..., Any], jobs: Sequence[Tuple], workers: int = 1) -> List[Any]:
    """Apply `fn` to every argument tuple, preserving job order.

    `fn` must be a module-level function so it can be shipped to worker processes.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]

    logger.debug(f"Dispatching {len(jobs)} chunks to {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [future.result() for future in futures]
