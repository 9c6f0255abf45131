"""Small shared helpers: seeded substreams and scalar maximization."""

from __future__ import annotations

import math

import numpy as np

GOLDEN = (math.sqrt(5) - 1) / 2


def spawn_rngs(seed: int, workers: int) -> list[np.random.Generator]:
    """Independent generators, one per worker, fully determined by (seed, workers)."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    seqs = np.random.SeedSequence(seed).spawn(workers)
    return [np.random.default_rng(s) for s in seqs]


def worker_chunks(total: int, workers: int) -> list[int]:
    """Split `total` items into per-worker counts (deterministic)."""
    base = total // workers
    out = [base] * workers
    for i in range(total - base * workers):
        out[i] += 1
    return [n for n in out if n > 0]


def golden_max(f, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    """Golden-section maximization of a unimodal-ish scalar function on [lo, hi].

    Returns (argmax, max).  Used only for local refinement around grid
    candidates, where the local unimodality assumption is benign.
    """
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)
