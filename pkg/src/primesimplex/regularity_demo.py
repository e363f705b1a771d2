"""A desk-scale energy-increment step for a single edge e = {a, b} (the d = 2 picture).

Everything lives on V_e = Z_N^2 as (N, N) arrays.  The weights are
nu_a on V_a, nu_b on V_b and nu_e on V_e, giving mu_e = nu_a (x) nu_b * nu_e.
For q = (q_1, q_2) the perturbed measure

    mu_{q,e}(x) = nu_e(x_1, q_2) nu_e(q_1, x_2) mu_e(x)

is again of this shape, with vertex weights nu_a * nu_e(., q_2) and
nu_b * nu_e(q_1, .); ``DemoWeights.extend`` returns it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from . import estimator
from .box_norm import box_norm
from .errors import ConfigurationError, DomainError
from .simplex_forms import Edge
from .weight_system import WeightSystem

THRESHOLD_GRID = (np.arange(32) + 0.5) / 32
DEFAULT_FRACTION = 0.5


@dataclass(frozen=True, eq=False)
class DemoWeights:
    nu_a: np.ndarray
    nu_b: np.ndarray
    nu_e: np.ndarray

    def __post_init__(self):
        a, b, e = (np.asarray(v, dtype=np.float64) for v in (self.nu_a, self.nu_b, self.nu_e))
        N = a.shape[0]
        if a.shape != (N,) or b.shape != (N,) or e.shape != (N, N):
            raise DomainError("weights must have shapes (N,), (N,), (N, N)")
        object.__setattr__(self, "nu_a", a)
        object.__setattr__(self, "nu_b", b)
        object.__setattr__(self, "nu_e", e)

    @classmethod
    def ones(cls, n_mod: int) -> DemoWeights:
        return cls(np.ones(n_mod), np.ones(n_mod), np.ones((n_mod, n_mod)))

    @classmethod
    def from_system(cls, ws: WeightSystem, e: Edge) -> DemoWeights:
        e = tuple(sorted(e))
        if len(e) != 2:
            raise ConfigurationError("the demo works on a 2-edge")
        t = ws.weight_tables(e)
        return cls(t[(e[0],)], t[(e[1],)], t[e])

    @property
    def n_mod(self) -> int:
        return self.nu_a.shape[0]

    @property
    def vertex_trivial(self) -> bool:
        return bool(np.all(self.nu_a == 1) and np.all(self.nu_b == 1))

    def mu(self) -> np.ndarray:
        return self.nu_a[:, None] * self.nu_b[None, :] * self.nu_e

    def tables(self, e: Edge = (0, 1)) -> dict[Edge, np.ndarray]:
        a, b = e
        return {(a,): self.nu_a, (b,): self.nu_b, (a, b): self.nu_e}

    def extend(self, q: tuple[int, int]) -> DemoWeights:
        q1, q2 = q
        return DemoWeights(self.nu_a * self.nu_e[:, q2], self.nu_b * self.nu_e[q1, :], self.nu_e)


@dataclass(frozen=True, eq=False)
class Partition:
    """Atoms of V_e are the cells of equal membership pattern in the generators."""

    generators: tuple[np.ndarray, ...]
    n_mod: int
    labels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        gens = tuple(np.asarray(g, dtype=bool) for g in self.generators)
        shape = (self.n_mod, self.n_mod)
        if any(g.shape != shape for g in gens):
            raise DomainError(f"generators must be boolean arrays of shape {shape}")
        object.__setattr__(self, "generators", gens)
        code = np.zeros(shape, dtype=np.int64)
        for g in gens:
            code = 2 * code + g
        _, labels = np.unique(code, return_inverse=True)
        object.__setattr__(self, "labels", labels.reshape(shape))

    @classmethod
    def trivial(cls, n_mod: int) -> Partition:
        return cls((), n_mod)

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> Partition:
        """Partition with the given atoms, generated by the binary digits of the labels."""
        labels = np.asarray(labels)
        _, dense = np.unique(labels, return_inverse=True)
        dense = dense.reshape(labels.shape)
        bits = max(int(dense.max()).bit_length(), 0)
        return cls(tuple((dense >> k) & 1 == 1 for k in range(bits)), labels.shape[0])

    @property
    def complexity(self) -> int:
        return len(self.generators)

    @property
    def n_atoms(self) -> int:
        return int(self.labels.max()) + 1

    def refine(self, *new: np.ndarray) -> Partition:
        return Partition(self.generators + tuple(new), self.n_mod)


def conditional_expectation(F: np.ndarray, part: Partition, mu: np.ndarray) -> np.ndarray:
    """E_mu(F | B): the mu-average of F on each atom, and 1 on atoms of zero mass."""
    F = np.asarray(F, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    lab = part.labels.ravel()
    mass = np.bincount(lab, weights=mu.ravel(), minlength=part.n_atoms)
    num = np.bincount(lab, weights=(F * mu).ravel(), minlength=part.n_atoms)
    avg = np.ones(part.n_atoms)
    pos = mass > 0
    avg[pos] = num[pos] / mass[pos]
    return avg[part.labels]


def l2_sq(F: np.ndarray, mu: np.ndarray) -> float:
    """||F||^2_{L^2(mu)} = E_x |F(x)|^2 mu(x)."""
    F = np.asarray(F, dtype=np.float64)
    return estimator.stable_sum(F * F * mu) / F.size


def energy(F: np.ndarray, part: Partition, mu: np.ndarray) -> float:
    return l2_sq(conditional_expectation(F, part, mu), mu)


def balanced_function(G: np.ndarray, part: Partition, mu: np.ndarray) -> np.ndarray:
    g = np.asarray(G, dtype=np.float64)
    return g - conditional_expectation(g, part, mu)


def gamma_table(F: np.ndarray, w: DemoWeights) -> np.ndarray:
    """Gamma(q) = <F, u_q^1 u_q^2>_{mu_{q,e}} for every q, with
    u_q^1(x_1) = F(x_1, q_2) and u_q^2(x_2) = F(q_1, x_2) F(q_1, q_2)."""
    F = np.asarray(F, dtype=np.float64)
    H = F * w.nu_e
    K = F * w.mu()
    return F * (H @ K.T @ H) / F.size


def gamma_q(G: np.ndarray, base: Partition, q: tuple[int, int], w: DemoWeights) -> float:
    F = balanced_function(G, base, w.mu())
    return float(gamma_table(F, w)[q])


def gamma_aggregate(F: np.ndarray, w: DemoWeights) -> float:
    """E_q Gamma(q) mu_e(q); equals ||F||^4 in the weighted box norm."""
    return estimator.stable_sum(gamma_table(F, w) * w.mu()) / np.asarray(F).size


@dataclass(frozen=True, eq=False)
class EnergyReport:
    before: float
    after: float
    increment: float
    q: tuple[int, int]
    gamma_q: float
    measures: dict[str, float]
    accepted: bool
    required: float
    partition: Partition | None
    weights: DemoWeights | None
    experimental: bool
    box_power: float = 0.0
    reason: str = ""

    def summary(self) -> dict:
        return {
            "before": self.before, "after": self.after, "increment": self.increment,
            "q": list(self.q), "gamma_q": self.gamma_q, "measures": self.measures,
            "accepted": self.accepted, "required": self.required, "experimental": self.experimental,
            "complexity": None if self.partition is None else self.partition.complexity,
            "box_power": self.box_power, "reason": self.reason,
        }


def _level_sets(u: np.ndarray) -> np.ndarray:
    """Rows: {u^+ > t} for t on the grid, then {u^- > t}."""
    pos, neg = np.maximum(u, 0.0), np.maximum(-u, 0.0)
    return np.concatenate([pos[None, :] > THRESHOLD_GRID[:, None], neg[None, :] > THRESHOLD_GRID[:, None]])


def increment_step(
    G: np.ndarray,
    base: Partition,
    w: DemoWeights,
    eta: float,
    fraction: float = DEFAULT_FRACTION,
) -> EnergyReport:
    """One refinement: pick q maximising Gamma, add one level-set cylinder per side of the edge.

    The step declines (accepted=False, no partition) when ||F||_box^4 < eta,
    i.e. 1_G is already regular at this scale, and reports failure when no q
    reaches Gamma(q) >= eta/4.

    ``before`` is the energy of 1_G under (base, mu_e); ``after`` is under the
    refined partition and mu_{q,e}.  With nu_a = nu_b = 1 and nu_e = 1 the two
    measures coincide.
    """
    G = np.asarray(G, dtype=bool)
    g = G.astype(np.float64)
    mu = w.mu()
    F = balanced_function(G, base, mu)
    gam = gamma_table(F, w)
    flat = int(np.argmax(gam))
    q = (flat // w.n_mod, flat % w.n_mod)
    gq = float(gam[q])
    box_power = estimator.stable_sum(gam * mu) / mu.size
    before = energy(g, base, mu)
    w_q = w.extend(q)
    mu_q = w_q.mu()
    measures = {"mu_e": estimator.stable_sum(mu) / mu.size, "mu_qe": estimator.stable_sum(mu_q) / mu.size}
    required = fraction * 2.0**-8 * eta * eta
    experimental = not w.vertex_trivial
    if box_power < eta * (1 - 1e-9):
        return EnergyReport(before, before, 0.0, q, gq, measures, False, required, None, None, experimental,
                            box_power, "box norm below eta: declined to refine")
    if gq < eta / 4:
        return EnergyReport(before, before, 0.0, q, gq, measures, False, required, None, None, experimental,
                            box_power, "no q with Gamma(q) >= eta/4")

    u1 = F[:, q[1]]
    u2 = F[q[0], :] * F[q]
    S1, S2 = _level_sets(u1), _level_sets(u2)
    corr = S1.astype(np.float64) @ (F * mu_q) @ S2.T.astype(np.float64)
    i, j = np.unravel_index(int(np.argmax(np.abs(corr))), corr.shape)
    N = w.n_mod
    cyl1 = np.broadcast_to(S1[i][:, None], (N, N)).copy()
    cyl2 = np.broadcast_to(S2[j][None, :], (N, N)).copy()
    refined = base.refine(cyl1, cyl2)
    after = energy(g, refined, mu_q)
    inc = after - before
    ok = inc >= required
    return EnergyReport(before, after, inc, q, gq, measures, ok, required, refined, w_q, experimental,
                        box_power, "refined" if ok else "increment below the required fraction")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    energy: float
    residual: float
    complexity: int


@dataclass(frozen=True)
class KvnTrace:
    records: tuple[TraceRecord, ...]
    converged: bool
    reason: str
    iteration_bound: float | None

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    def write_jsonl(self, fh: TextIO) -> None:
        for r in self.records:
            fh.write(json.dumps({"iteration": r.iteration, "energy": r.energy, "residual": r.residual,
                                 "complexity": r.complexity}, sort_keys=True) + "\n")


def kvn_loop(
    G: np.ndarray,
    w: DemoWeights,
    eps: float,
    max_iters: int = 64,
    fraction: float = DEFAULT_FRACTION,
) -> KvnTrace:
    """Iterate increment_step from the trivial partition until ||1_G - E(1_G|B)||_box <= eps.

    Each step uses eta = residual^4, which the current residual satisfies by
    construction.  ``iteration_bound`` is the energy ceiling mu(V_e) divided
    by the smallest accepted increment fraction * 2^-8 * eps^8.
    """
    G = np.asarray(G, dtype=bool)
    if G.shape != (w.n_mod, w.n_mod):
        raise DomainError("G must be a boolean (N, N) array")
    part = Partition.trivial(w.n_mod)
    g = G.astype(np.float64)
    records = []
    cap = estimator.stable_sum(w.mu()) / G.size
    bound = math.ceil(cap / (fraction * 2.0**-8 * eps**8)) if eps > 0 else None
    for it in range(max_iters + 1):
        mu = w.mu()
        F = g - conditional_expectation(g, part, mu)
        residual = box_norm(F, (0, 1), w.tables()).norm
        records.append(TraceRecord(it, energy(g, part, mu), residual, part.complexity))
        if residual <= eps:
            return KvnTrace(tuple(records), True, "residual below eps", bound)
        if it == max_iters:
            break
        step = increment_step(G, part, w, residual**4, fraction)
        if not step.accepted:
            return KvnTrace(tuple(records), False, step.reason, bound)
        part, w = step.partition, step.weights
    return KvnTrace(tuple(records), False, "max_iters reached", bound)


def half_graph(n_mod: int) -> np.ndarray:
    """G = {(x_1, x_2) : x_1 < x_2}."""
    x = np.arange(n_mod)
    return x[:, None] < x[None, :]
