"""Counting affine copies x + tF, the weighted simplex average over Z_N, and the reduction utilities.

Sets in [1, N]^d are boolean arrays of shape (N,)*d with ``A[x - 1]``
recording membership of x.  Sets in Z_N^d are boolean arrays of shape
(N,)*d indexed directly by residues.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from . import estimator, exact
from .errors import ConfigurationError, DomainError, ModulusError
from .estimator import DEFAULT_BUDGET, EstimatorResult
from .gt_measure import GreenTaoMeasure, Simplex, copy_weight
from .numtheory import SieveContext, WTrick, build_sieve

# Counting is a boolean AND per (x, t); it is ~100x cheaper per term than a float product.
COUNT_BUDGET = 20_000_000_000


@dataclass(frozen=True)
class PatternSet:
    points: tuple[tuple[int, ...], ...]
    dim: int = field(init=False)

    def __post_init__(self):
        pts = tuple(tuple(int(c) for c in p) for p in self.points)
        if not pts:
            raise ConfigurationError("a pattern needs at least one point")
        d = len(pts[0])
        if d < 1 or any(len(p) != d for p in pts):
            raise ConfigurationError("pattern points must share a dimension >= 1")
        if len(set(pts)) != len(pts):
            raise ConfigurationError("pattern points must be distinct")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dim", d)

    @classmethod
    def parse(cls, text: str) -> PatternSet:
        try:
            pts = [tuple(int(c) for c in part.split(",")) for part in text.split(";") if part.strip()]
        except ValueError as exc:
            raise ConfigurationError(f"cannot parse pattern {text!r}") from exc
        return cls(tuple(pts))

    @classmethod
    def from_simplex(cls, delta: Simplex) -> PatternSet:
        return cls(delta.vertices)

    def as_simplex(self) -> Simplex:
        if len(self.points) != self.dim + 1:
            raise ConfigurationError(f"a {self.dim}-simplex needs {self.dim + 1} points, got {len(self.points)}")
        return Simplex(self.points)

    def complexity(self) -> int:
        """sum_i |pi_i(F)|; equals l(Delta) for a simplex."""
        return sum(len({p[k] for p in self.points}) for k in range(self.dim))

    def __str__(self) -> str:
        return ";".join(",".join(map(str, p)) for p in self.points)


@dataclass(frozen=True)
class CountReport:
    n_cap: int
    total_pairs: int
    trivial_count: int
    predicted_scale: float
    ratio: float

    def as_row(self) -> list:
        return [self.n_cap, self.total_pairs, repr(self.predicted_scale), repr(self.ratio)]


def predicted_scale(n_cap: int, dim: int, complexity: int) -> float:
    """N^{d+1} (log N)^{-l}."""
    if n_cap < 2:
        return 0.0
    return float(n_cap) ** (dim + 1) / math.log(n_cap) ** complexity


def _t_values(n_cap: int, t_positive: bool, include_zero: bool) -> list[int]:
    ts = list(range(1, n_cap + 1))
    if not t_positive:
        ts = list(range(-n_cap, 0)) + ts
    if include_zero:
        ts = sorted(ts + [0])
    return ts


def _valid_box(pts: np.ndarray, t: int, n_cap: int) -> tuple[np.ndarray, np.ndarray]:
    """Inclusive per-axis range of x with x + t*p in [1, N]^d for every p."""
    tp = t * pts
    return 1 - tp.min(axis=0), n_cap - tp.max(axis=0)


def count_cost(F: PatternSet, n_cap: int, t_positive: bool = True, include_zero: bool = False) -> int:
    pts = np.asarray(F.points, dtype=np.int64)
    cost = 0
    for t in _t_values(n_cap, t_positive, include_zero):
        lo, hi = _valid_box(pts, t, n_cap)
        cost += math.prod(max(int(h - l + 1), 0) for l, h in zip(lo, hi)) * len(F.points)
    return cost


def count_affine_copies(
    F: PatternSet,
    A: np.ndarray,
    n_cap: int,
    t_positive: bool = True,
    include_zero: bool = False,
    threads: int = 1,
    budget: int = COUNT_BUDGET,
) -> CountReport:
    """Pairs (x, t) with x + tF inside A, over x in Z^d, t in [1, N] (and [-N, -1], 0 by flag).

    Points must land in [1, N]^d.  With t in [1, N] and F = {0} this counts
    every (x in A, t), N^2 pairs for A = [1, N].
    """
    A = np.asarray(A, dtype=bool)
    d = F.dim
    if A.shape != (n_cap,) * d:
        raise DomainError(f"A must be a boolean array of shape {(n_cap,) * d}")
    estimator.check_budget(count_cost(F, n_cap, t_positive, include_zero), budget)
    pts = np.asarray(F.points, dtype=np.int64)
    ts = _t_values(n_cap, t_positive, include_zero)

    def per_t(t: int) -> int:
        lo, hi = _valid_box(pts, t, n_cap)
        if np.any(hi < lo):
            return 0
        acc = None
        for p in pts:
            start = lo + t * p - 1
            stop = hi + t * p
            view = A[tuple(slice(int(a), int(b)) for a, b in zip(start, stop))]
            acc = view.copy() if acc is None else (acc & view)
        return int(np.count_nonzero(acc))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(per_t, ts))
    else:
        counts = [per_t(t) for t in ts]
    total = sum(counts)
    if len(F.points) == 1:
        trivial = total
    else:
        trivial = sum(c for t, c in zip(ts, counts) if t == 0)
    scale = predicted_scale(n_cap, d, F.complexity())
    return CountReport(n_cap, total, trivial, scale, total / scale if scale > 0 else math.nan)


def count_mod_copies(A: np.ndarray, delta: Simplex, include_zero: bool = True) -> int:
    """|{(x, t) in Z_N^d x Z_N : x + t v_i in A for all i}| with wraparound."""
    A = np.asarray(A, dtype=bool)
    N = A.shape[0]
    total = 0
    for t in range(0 if include_zero else 1, N):
        acc = np.ones_like(A)
        for v in delta.vertices:
            acc &= np.roll(A, shift=tuple(-t * c for c in v), axis=tuple(range(A.ndim)))
        total += int(np.count_nonzero(acc))
    return total


def _check_prime_set(A: np.ndarray, measure: GreenTaoMeasure) -> np.ndarray:
    N = measure.n_cap
    if not exact.is_prime_int(N):
        raise ModulusError(f"N={N} must be prime")
    A = np.asarray(A, dtype=bool)
    if A.shape != (N,) * measure.dim:
        raise DomainError(f"A must be a boolean array of shape {(N,) * measure.dim}")
    return A


def weighted_simplex_average(
    A: np.ndarray,
    delta: Simplex,
    measure: GreenTaoMeasure,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
    labelled: bool = True,
) -> EstimatorResult:
    """E_{x in Z_N^d, t in Z_N} prod_i 1_A(x + t v_i) w(x + t Delta).

    ``labelled=True`` weighs the copy vertex by vertex (one nu-factor per
    distinct vertex coordinate), the reading under which the average equals
    the hypergraph side exactly.  ``labelled=False`` uses the set weight,
    which differs only at t = 0 where the copy collapses to {x}.
    """
    A = _check_prime_set(A, measure)
    if delta.dim != measure.dim:
        raise ConfigurationError("simplex and measure dimensions differ")
    d, N = delta.dim, measure.n_cap
    verts = np.asarray(delta.vertices, dtype=np.int64)

    def term(p):
        x, t = p[:, :d], p[:, d]
        ind = np.ones(len(p), dtype=bool)
        for v in verts:
            y = np.mod(x + t[:, None] * v, N)
            ind &= A[tuple(y.T)]
        w = copy_weight(x, t, delta, measure)
        if not labelled:
            single = np.ones(len(p))
            for k in range(d):
                single = single * measure.values[k][x[:, k]]
            w = np.where(t == 0, single, w)
        return np.where(ind, w, 0.0)

    return estimator.estimate(term, (N,) * (d + 1), mode=mode, cost_per_point=2 * (d + 1), budget=budget,
                              samples=samples, seed=seed, threads=threads)


def weighted_density(
    A: np.ndarray,
    measure: GreenTaoMeasure,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> EstimatorResult:
    """E_{x in Z_N^d} 1_A(x) w(x) with w(x) = prod_k nu_k(x_k)."""
    A = np.asarray(A, dtype=bool)
    d, N = measure.dim, measure.n_cap
    if A.shape != (N,) * d:
        raise DomainError(f"A must be a boolean array of shape {(N,) * d}")

    def term(x):
        w = np.ones(len(x))
        for k in range(d):
            w = w * measure.values[k][x[:, k]]
        return np.where(A[tuple(x.T)], w, 0.0)

    return estimator.estimate(term, (N,) * d, mode=mode, cost_per_point=d + 1, budget=budget,
                              samples=samples, seed=seed, threads=threads)


@dataclass(frozen=True)
class ResidueChoice:
    b: tuple[int, ...]
    points: np.ndarray
    count: int
    total: int
    certificate: dict


def pigeonhole_residue(A_points: np.ndarray, wtrick: WTrick, n_cap: int | None = None) -> ResidueChoice:
    """The residue vector b (coprime to W per coordinate) catching the most points of A.

    Ties go to the lexicographically smallest b.  ``points`` is A1 = {n : W n + b in A}.
    """
    A = np.asarray(A_points, dtype=np.int64)
    if A.ndim != 2:
        raise DomainError("A must be an array of points with shape (k, d)")
    d = A.shape[1]
    W = wtrick.w
    if len(A) == 0:
        b = (1,) * d
        return ResidueChoice(b, A.copy(), 0, 0, {"count": 0, "total": 0, "phi_w": wtrick.phi_w})
    r = np.mod(A, W)
    ok = np.all(np.gcd(r, W) == 1, axis=1)
    if not np.any(ok):
        b = tuple(wtrick.residues()[0] for _ in range(d))
        count = 0
    else:
        rows, counts = np.unique(r[ok], axis=0, return_counts=True)
        best = int(np.argmax(counts))  # np.unique sorts rows, so argmax picks the smallest tied b
        b = tuple(int(c) for c in rows[best])
        count = int(counts[best])
    mask = np.all(r == np.asarray(b), axis=1)
    A1 = (A[mask] - np.asarray(b)) // W
    cert = {
        "count": count,
        "total": int(len(A)),
        "phi_w": wtrick.phi_w,
        "average_share": len(A) / wtrick.phi_w**d,
    }
    if n_cap is not None and n_cap > 2:
        # alpha N^d / ((log N)^d phi(W)^d), alpha being the relative density of A in P_N^d
        pi_n = int(np.count_nonzero(build_sieve(n_cap).is_prime))
        alpha = len(A) / pi_n**d
        cert["alpha"] = alpha
        cert["bound_shape"] = alpha * n_cap**d / (math.log(n_cap) ** d * wtrick.phi_w**d)
    return ResidueChoice(b, A1, count, int(len(A)), cert)


def unwrap_copy(
    x: Sequence[int],
    t: int,
    delta: Simplex,
    lo: int,
    hi: int,
    n_cap: int,
) -> tuple[int, np.ndarray] | None:
    """Lift x + t Delta (mod N, inside [lo, hi]^d) to a genuine copy in Z^d.

    Tries the lift t mod N, then t mod N - N; returns (lift, points) for the
    first lift whose integer points all lie in the box, else None.
    """
    x = np.asarray(x, dtype=np.int64)
    verts = np.asarray(delta.vertices, dtype=np.int64)
    t0 = int(t) % n_cap
    for lift in (t0, t0 - n_cap):
        pts = x[None, :] + lift * verts
        if np.all((pts >= lo) & (pts <= hi)):
            return lift, pts
    return None


@dataclass(frozen=True)
class UnwrapStats:
    eps: float
    wrapped: int
    failures: int


def unwrap_exhaustive(delta: Simplex, n_cap: int, lo: int, hi: int) -> UnwrapStats:
    """Every (x, t) with x + t Delta inside [lo, hi]^d mod N, checked with unwrap_copy."""
    d = delta.dim
    side = np.arange(lo, hi + 1)
    grid = np.stack(np.meshgrid(*[side] * d, indexing="ij"), axis=-1).reshape(-1, d)
    verts = np.asarray(delta.vertices, dtype=np.int64)
    wrapped = failures = 0
    for t in range(n_cap):
        inside = np.ones(len(grid), dtype=bool)
        for v in verts:
            y = np.mod(grid + t * v, n_cap)
            inside &= np.all((y >= lo) & (y <= hi), axis=1)
        for x in grid[inside]:
            wrapped += 1
            if unwrap_copy(x, t, delta, lo, hi, n_cap) is None:
                failures += 1
    return UnwrapStats((hi - lo) / n_cap, wrapped, failures)


def unwrap_threshold_sweep(delta: Simplex, n_cap: int, eps_list: Sequence[float], lo: int | None = None):
    """Unwrap statistics per box size eps*N; the empirical threshold is the largest eps with no failures."""
    stats = []
    for eps in sorted(eps_list):
        width = int(round(eps * n_cap))
        start = n_cap // 10 if lo is None else lo
        stats.append(unwrap_exhaustive(delta, n_cap, start, start + width))
    threshold = None
    for st in stats:
        if st.failures:
            break
        threshold = st.eps
    return stats, threshold


@dataclass(frozen=True)
class ScalingTable:
    reports: tuple[CountReport, ...]
    partial: bool

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["N", "count", "predicted_scale", "ratio"])
        for r in self.reports:
            w.writerow(r.as_row())

    def band(self) -> float:
        ratios = [r.ratio for r in self.reports if r.ratio > 0]
        return max(ratios) / min(ratios) if ratios else math.nan


def prime_box(n_cap: int, dim: int, sieve: SieveContext) -> np.ndarray:
    """P^d intersected with [1, N]^d as a boolean array indexed by x - 1."""
    sieve.check_range(n_cap)
    p = sieve.is_prime[1 : n_cap + 1]
    out = p
    for _ in range(dim - 1):
        out = out[..., None] & p
    return np.ascontiguousarray(out)


def scaling_experiment(
    delta: Simplex,
    n_list: Sequence[int],
    use_all_primes: bool = True,
    alpha: float = 0.5,
    seed: int = 0,
    threads: int = 1,
    budget: int = COUNT_BUDGET,
) -> ScalingTable:
    """Prime constellations x + t Delta in P^d cap [1, N]^d, t in [1, N], against N^{d+1}(log N)^{-l}.

    With ``use_all_primes=False`` A is a pseudo-random subset of P^d of
    relative density ``alpha``, drawn from Philox(seed) per N.
    """
    F = PatternSet.from_simplex(delta)
    sieve = build_sieve(max(max(n_list), 2))
    reports = []
    partial = False
    for N in n_list:
        if count_cost(F, N) > budget:
            partial = True
            break
        A = prime_box(N, delta.dim, sieve)
        if not use_all_primes:
            keep = estimator.block_generator(seed, N).random(A.shape) < alpha
            A = A & keep
        reports.append(count_affine_copies(F, A, N, threads=threads, budget=budget))
    return ScalingTable(tuple(reports), partial)
