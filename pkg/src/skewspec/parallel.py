"""Seeded substreams and an ordered thread pool.

Every random draw is keyed by (seed, *key) through a counter-based
Philox generator, so results do not depend on how work is split across
threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def torus_samples(seed: int, key: tuple, M: int, r: int) -> np.ndarray:
    """M uniform points of the r-torus; sample i comes from substream (seed, *key, i)."""
    out = np.empty((M, r))
    for i in range(M):
        out[i] = substream(seed, *key, i).random(r)
    return out


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("SKEWSPEC_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def pmap(fn, items, threads: int | None = None) -> list:
    items = list(items)
    k = resolve_threads(threads)
    if k == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))
