"""The Green-Tao measure nu_b, its sieve ingredients, and weights of finite point sets.

Measures are tabulated over the residues n in [0, N).  Inside the window
eps1*N <= n <= eps2*N the value is

    nu_b(n) = (phi(W)/W) * Lambda_R(W n + b)**2 / log R

and outside it nu_b(n) = 1.  Lambda_R is the truncated divisor sum
sum_{d | m, d <= R} mu(d) log(R/d).
"""

from __future__ import annotations

import csv
import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from . import exact
from .errors import ConfigurationError, DomainError
from .numtheory import SieveContext, WTrick, check_residue

DEFAULT_EPS1 = 0.2
DEFAULT_EPS2 = 0.4


def asymptotic_r(n_cap: int, dim: int) -> float:
    """R = N^(1 / (d * 2^(d+5))), the asymptotic choice; close to 1 at desk scale."""
    return float(n_cap) ** (1.0 / (dim * 2 ** (dim + 5)))


def desk_r(n_cap: int) -> float:
    """R = N^(1/2), the default truncation used by experiments."""
    return math.sqrt(n_cap)


@dataclass(frozen=True)
class MeasureParams:
    n_cap: int
    wtrick: WTrick
    residues: tuple[int, ...]
    r_value: float
    eps1: float = DEFAULT_EPS1
    eps2: float = DEFAULT_EPS2

    def __post_init__(self):
        object.__setattr__(self, "residues", tuple(int(b) for b in self.residues))
        if self.n_cap < 1:
            raise ConfigurationError("n_cap must be positive")
        if not self.residues:
            raise ConfigurationError("at least one residue is required")
        for b in self.residues:
            check_residue(b, self.wtrick.w)
        if not self.r_value > 1:
            raise ConfigurationError(f"R must exceed 1, got {self.r_value}")
        if not 0 < self.eps1 < self.eps2 < 1:
            raise ConfigurationError(f"need 0 < eps1 < eps2 < 1, got {self.eps1}, {self.eps2}")

    @property
    def dim(self) -> int:
        return len(self.residues)

    def window(self) -> tuple[int, int]:
        """Inclusive integer window [lo, hi] of n with eps1*N <= n <= eps2*N."""
        lo = math.ceil(self.eps1 * self.n_cap)
        hi = min(math.floor(self.eps2 * self.n_cap), self.n_cap - 1)
        return lo, hi

    def in_window(self, n: int) -> bool:
        lo, hi = self.window()
        return lo <= n <= hi


@dataclass(frozen=True, eq=False)
class GreenTaoMeasure:
    """Tabulated nu_{b_j}(n) for j < dim, 0 <= n < n_cap.

    ``params`` is None for synthetic measures (the all-ones stub or
    hand-specified tables used in tests).
    """

    values: np.ndarray
    params: MeasureParams | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ConfigurationError("measure table must have shape (dim, n_cap)")
        if np.any(v < 0):
            raise ConfigurationError("measure values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def ones(cls, n_cap: int, dim: int = 1) -> GreenTaoMeasure:
        return cls(np.ones((dim, n_cap)))

    @property
    def n_cap(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def __call__(self, j: int, n):
        return self.values[j][np.mod(n, self.n_cap)]

    def mean(self, j: int = 0) -> float:
        return math.fsum(self.values[j]) / self.n_cap

    def write_csv(self, fh: TextIO) -> None:
        """CSV with columns n, j, nu (one row per coordinate and residue)."""
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["n", "j", "nu"])
        for j in range(self.dim):
            for n, val in enumerate(self.values[j].tolist()):
                w.writerow([n, j, repr(val)])


def mangoldt_bar(n: int, wtrick: WTrick, b: int, sieve: SieveContext) -> float:
    check_residue(b, wtrick.w)
    m = wtrick.w * n + b
    sieve.check_range(m)
    if m >= 2 and sieve.is_prime[m]:
        return wtrick.phi_w / wtrick.w * math.log(m)
    return 0.0


def mangoldt_bar_table(N: int, wtrick: WTrick, b: int, sieve: SieveContext) -> np.ndarray:
    """Lambda-bar_b(n) for n = 0..N as an array."""
    check_residue(b, wtrick.w)
    sieve.check_range(wtrick.w * N + b)
    m = wtrick.w * np.arange(N + 1, dtype=np.int64) + b
    out = np.zeros(N + 1)
    mask = sieve.is_prime[m]
    out[mask] = wtrick.phi_w / wtrick.w * np.log(m[mask].astype(np.float64))
    return out


def gy_divisor_sum(m: int, r_value: float, sieve: SieveContext) -> float:
    """Lambda_R(m) = sum over squarefree d | m, d <= R of mu(d) log(R/d)."""
    if m < 1:
        raise DomainError(f"Lambda_R is defined for m >= 1, got {m}")
    primes = sieve.prime_factors(m)
    terms = []
    for k in range(len(primes) + 1):
        for combo in itertools.combinations(primes, k):
            d = math.prod(combo)
            if d <= r_value:
                terms.append((-1) ** k * math.log(r_value / d))
    return math.fsum(terms)


def nu(n: int, j: int, params: MeasureParams, sieve: SieveContext) -> float:
    if not 0 <= n < params.n_cap:
        raise DomainError(f"n={n} outside [0, {params.n_cap})")
    if not params.in_window(n):
        return 1.0
    w = params.wtrick
    lam = gy_divisor_sum(w.w * n + params.residues[j], params.r_value, sieve)
    return w.phi_w / w.w * lam * lam / math.log(params.r_value)


def gy_progression_table(lo: int, hi: int, w: int, b: int, r_value: float, sieve: SieveContext) -> np.ndarray:
    """Lambda_R(w*n + b) for n = lo..hi, by sieving each squarefree d <= R over the progression."""
    dmax = math.floor(r_value)
    sieve.check_range(dmax)
    out = np.zeros(hi - lo + 1)
    for d in range(1, dmax + 1):
        mu = int(sieve.mobius[d])
        if mu == 0 or math.gcd(d, w) != 1:
            continue
        # w*n + b = 0 (mod d)  <=>  n = -b * w^{-1} (mod d)
        n0 = (-b * pow(w, -1, d)) % d if d > 1 else 0
        out[(n0 - lo) % d :: d] += mu * math.log(r_value / d)
    return out


def tabulate_measure(params: MeasureParams, sieve: SieveContext) -> GreenTaoMeasure:
    lo, hi = params.window()
    w = params.wtrick
    scale = w.phi_w / w.w / math.log(params.r_value)
    values = np.ones((params.dim, params.n_cap))
    if lo <= hi:
        for j, b in enumerate(params.residues):
            lam = gy_progression_table(lo, hi, w.w, b, params.r_value, sieve)
            values[j, lo : hi + 1] = scale * lam * lam
    return GreenTaoMeasure(values, params)


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[tuple[int, ...], ...]
    dim: int = field(init=False)

    def __post_init__(self):
        verts = tuple(tuple(int(c) for c in v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        d = len(verts) - 1
        if d < 1 or any(len(v) != d for v in verts):
            raise ConfigurationError("a d-simplex needs d+1 vertices in Z^d")
        object.__setattr__(self, "dim", d)
        edges = [[v[k] - verts[0][k] for k in range(d)] for v in verts[1:]]
        if exact.det(edges) == 0:
            raise ConfigurationError(f"degenerate simplex {verts}")

    @classmethod
    def parse(cls, text: str) -> Simplex:
        """Parse "0,0;1,0;0,1" (semicolon-separated vertices, comma-separated coordinates)."""
        try:
            verts = [tuple(int(c) for c in part.split(",")) for part in text.split(";") if part.strip()]
        except ValueError as exc:
            raise ConfigurationError(f"cannot parse simplex {text!r}") from exc
        return cls(tuple(verts))

    def coords(self, k: int) -> list[int]:
        return [v[k] for v in self.vertices]

    def spread(self) -> int:
        return max(abs(a[k] - b[k]) for a in self.vertices for b in self.vertices for k in range(self.dim))

    def __str__(self) -> str:
        return ";".join(",".join(map(str, v)) for v in self.vertices)


def l_delta(delta: Simplex) -> int:
    return sum(len(set(delta.coords(k))) for k in range(delta.dim))


def pattern_weight(points: Iterable[Sequence[int]], measure: GreenTaoMeasure) -> float:
    """w(S) = prod_i prod_{y in pi_i(S)} nu_{b_i}(y); each projection is a set."""
    pts = [tuple(int(c) for c in p) for p in points]
    if not pts:
        return 1.0
    d = measure.dim
    out = 1.0
    for i in range(d):
        for y in sorted({p[i] for p in pts}):
            if not 0 <= y < measure.n_cap:
                raise DomainError(f"coordinate {y} outside [0, {measure.n_cap})")
            out *= float(measure.values[i, y])
    return out


def copy_weight(x, t, delta: Simplex, measure: GreenTaoMeasure):
    """Weight of the labelled copy x + t*Delta: prod_k prod_{c in pi_k(Delta)} nu_k(x_k + t c mod N).

    Agrees with ``pattern_weight`` of the image whenever the image has the
    same projections as Delta, i.e. t != 0 mod a prime N larger than the
    coordinate spread.  At t = 0 it keeps one factor per vertex class, which
    is what the product over the form family computes.  Vectorised over
    broadcastable ``x[..., k]`` and ``t``.
    """
    x = np.asarray(x, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    N = measure.n_cap
    out = np.ones(np.broadcast_shapes(x.shape[:-1], t.shape))
    for k in range(delta.dim):
        for c in sorted(set(delta.coords(k))):
            out = out * measure.values[k][np.mod(x[..., k] + t * c, N)]
    return out
