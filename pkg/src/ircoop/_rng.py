"""Counter-based random streams.

Every Monte Carlo routine splits its work into fixed-size blocks. Block b
of a run keyed by (seed, tag) draws from a Philox generator whose key is
(seed, tag) and whose counter starts at b * 2^192, so blocks never overlap
and the result does not depend on how blocks are distributed over workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

MASK64 = (1 << 64) - 1
BLOCK = 1 << 16

# stream purposes, stored in the upper half of the tag
OUTAGE = 1
SIMULATION = 2

T = TypeVar("T")


def stream(seed: int, block: int, tag: int = 0) -> np.random.Generator:
    if seed is None:
        raise ValueError("an explicit seed is required")
    key = np.array([int(seed) & MASK64, int(tag) & MASK64], dtype=np.uint64)
    counter = np.array([0, 0, 0, int(block) & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def make_tag(purpose: int, index: int = 0) -> int:
    return (purpose << 32) | (index & 0xFFFFFFFF)


def block_sizes(n: int, block: int = BLOCK) -> list:
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])


def run_blocks(fn: Callable[[int, int], T], sizes: Sequence[int], workers: int = 1) -> list:
    """Evaluate ``fn(block_index, size)`` for every block, in block order."""
    if workers <= 1 or len(sizes) <= 1:
        return [fn(b, s) for b, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def uniforms(rng: np.random.Generator, size: int, k: int, antithetic: bool = False) -> np.ndarray:
    """(size, k) uniforms drawn one column at a time; with ``antithetic`` the
    second half of the rows mirrors the first (u -> 1 - u)."""
    u = np.empty((size, k))
    for col in range(k):
        u[:, col] = rng.random(size)
    if antithetic:
        half = (size + 1) // 2
        u[half:] = 1.0 - u[:size - half]
    return u


def exponentials(u: np.ndarray) -> np.ndarray:
    """Exp(1) variates by inversion; u = 1 maps to infinity."""
    with np.errstate(divide="ignore"):
        return -np.log1p(-u)


def defensive_mixture(nu: np.ndarray, sel: np.ndarray, mu) -> tuple[np.ndarray, np.ndarray]:
    """Reinterpret Exp(1) draws ``nu`` as draws from 0.5 Exp(1) + 0.5 Exp(mean mu).

    Column-wise ``mu`` <= 1. Returns the new draws and the per-row log
    likelihood ratio of the nominal i.i.d. Exp(1) law to the mixture. Each
    factor is at most 2.
    """
    nu = np.where(sel < 0.5, nu * mu, nu)
    inv = 1.0 / np.asarray(mu, dtype=float)
    with np.errstate(over="ignore"):
        density = 0.5 + 0.5 * inv * np.exp(-nu * (inv - 1.0))
    return nu, -np.log(density).sum(axis=1)
