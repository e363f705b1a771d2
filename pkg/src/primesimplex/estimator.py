"""Exact and Monte Carlo means of a vectorised term over a grid Z_{n_1} x ... x Z_{n_k}.

Both modes split the work into fixed-size blocks whose boundaries do not
depend on the number of worker threads.  Each block is reduced with
``stable_sum`` and the block results are combined in block order, so the
returned value is bit-identical for any ``threads`` setting.

Monte Carlo block ``i`` draws from Philox with ``key=seed`` and counter
``[0, i, 0, 0]``; a block's samples are therefore fixed by (seed, i) alone.
"""

from __future__ import annotations

import json
import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BudgetExceededError, ConfigurationError

DEFAULT_BUDGET = 2_000_000_000
EXACT_BLOCK = 1 << 17
MC_BLOCK = 1 << 15

TermFn = Callable[[np.ndarray], np.ndarray]


def stable_sum(values: np.ndarray) -> float:
    """Sum in a fixed order: numpy pairwise sums over runs of 256, then an exact fsum of the runs."""
    v = np.asarray(values, dtype=np.float64).ravel()
    pad = (-v.size) % 256
    if pad:
        v = np.concatenate([v, np.zeros(pad)])
    return math.fsum(v.reshape(-1, 256).sum(axis=1).tolist())


@dataclass(frozen=True)
class EstimatorResult:
    value: float
    mode: str
    samples: int
    stderr: float
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def default_threads() -> int:
    return os.cpu_count() or 1


def _map_blocks(fn, n_blocks: int, threads: int) -> list:
    if threads <= 1 or n_blocks <= 1:
        return [fn(i) for i in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_blocks)))


def check_budget(terms: int, budget: int) -> None:
    if terms > budget:
        raise BudgetExceededError(
            f"exact summation needs {terms} term evaluations, budget is {budget}; rerun with mode='mc'"
        )


def exact_mean(
    term: TermFn,
    shape: Sequence[int],
    *,
    cost_per_point: int = 1,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> EstimatorResult:
    """Average of ``term`` over every point of the grid ``shape``."""
    shape = tuple(int(s) for s in shape)
    total = math.prod(shape)
    if total == 0:
        raise ConfigurationError("empty grid")
    check_budget(total * max(cost_per_point, 1), budget)
    n_blocks = -(-total // EXACT_BLOCK)

    def block(i: int) -> float:
        flat = np.arange(i * EXACT_BLOCK, min((i + 1) * EXACT_BLOCK, total), dtype=np.int64)
        pts = np.stack(np.unravel_index(flat, shape), axis=-1) if shape else np.zeros((1, 0), np.int64)
        return stable_sum(term(pts))

    sums = _map_blocks(block, n_blocks, threads)
    return EstimatorResult(value=math.fsum(sums) / total, mode="exact", samples=total, stderr=0.0, seed=None)


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, int(block), 0, 0]))


def sample_points(seed: int, block: int, count: int, shape: Sequence[int]) -> np.ndarray:
    rng = block_generator(seed, block)
    cols = [rng.integers(0, n, size=count, dtype=np.int64) for n in shape]
    return np.stack(cols, axis=-1) if cols else np.zeros((count, 0), np.int64)


def mc_mean(
    term: TermFn,
    shape: Sequence[int],
    *,
    samples: int,
    seed: int,
    threads: int = 1,
) -> EstimatorResult:
    """Uniform Monte Carlo average with the sample-variance standard error."""
    if samples < 2:
        raise ConfigurationError("Monte Carlo needs at least 2 samples")
    if seed is None:
        raise ConfigurationError("Monte Carlo mode requires an explicit seed")
    shape = tuple(int(s) for s in shape)
    n_blocks = -(-samples // MC_BLOCK)

    def block(i: int) -> tuple[float, float]:
        count = min(MC_BLOCK, samples - i * MC_BLOCK)
        vals = np.asarray(term(sample_points(seed, i, count, shape)), dtype=np.float64)
        return stable_sum(vals), stable_sum(vals * vals)

    parts = _map_blocks(block, n_blocks, threads)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 - samples * mean * mean, 0.0) / (samples - 1)
    return EstimatorResult(value=mean, mode="mc", samples=samples, stderr=math.sqrt(var / samples), seed=int(seed))


def estimate(
    term: TermFn,
    shape: Sequence[int],
    *,
    mode: str = "exact",
    cost_per_point: int = 1,
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> EstimatorResult:
    if mode == "exact":
        if samples is not None:
            raise ConfigurationError("mode='exact' does not take a sample count")
        return exact_mean(term, shape, cost_per_point=cost_per_point, budget=budget, threads=threads)
    if mode == "mc":
        if samples is None or seed is None:
            raise ConfigurationError("mode='mc' requires samples and seed")
        return mc_mean(term, shape, samples=samples, seed=seed, threads=threads)
    raise ConfigurationError(f"unknown mode {mode!r}; expected 'exact' or 'mc'")
