"""Seeded randomness and binomial confidence intervals."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 256
Z95 = 1.96


def wilson(successes: int, trials: int, z: float = Z95):
    """Wilson score interval; returns ``(low, high, halfwidth)``."""
    if trials <= 0:
        return 0.0, 1.0, 0.5
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half), half


def chunk_rng(seed: int, chunk: int, stream: int = 0) -> np.random.Generator:
    """Generator for one fixed-size chunk of trials.

    Streams are keyed by ``(stream, chunk)`` so results do not depend on how
    chunks are spread over workers.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(chunk)))
    return np.random.default_rng(ss)


def rng_for(seed, stream: int = 0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return chunk_rng(0 if seed is None else seed, 0, stream)


def chunked(trials: int, size: int = CHUNK):
    """Yield ``(chunk_index, count)`` covering ``trials`` items."""
    i = 0
    while trials > 0:
        n = min(size, trials)
        yield i, n
        trials -= n
        i += 1


def map_chunks(func, trials: int, threads: int = 1, size: int = CHUNK):
    """Run ``func(chunk_index, count)`` over all chunks, preserving chunk order."""
    jobs = list(chunked(trials, size))
    if threads <= 1 or len(jobs) <= 1:
        return [func(i, n) for i, n in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: func(*job), jobs))
