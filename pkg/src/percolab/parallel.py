"""Deterministic fan-out of replicate ranges over worker processes.

Per-replicate values depend only on (master_seed, replicate_index), so results
are assembled in replicate order and the worker count never changes a number.
"""

from concurrent.futures import ProcessPoolExecutor

import numpy as np


def run_replicate_chunks(fn, static_args: tuple, replicates: int, workers: int = 1) -> np.ndarray:
    """Evaluate fn(*static_args, start, stop) over [0, replicates) in chunks.

    `fn` must be a module-level function returning one array entry per replicate.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if workers <= 1 or replicates == 1:
        return np.asarray(fn(*static_args, 0, replicates))
    bounds = np.linspace(0, replicates, workers + 1).astype(int)
    spans = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=len(spans)) as pool:
        futures = [pool.submit(fn, *static_args, a, b) for a, b in spans]
        parts = [f.result() for f in futures]  # submission order == replicate order
    return np.concatenate(parts)
