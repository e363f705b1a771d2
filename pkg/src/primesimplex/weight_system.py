"""Edge weights nu_e and measures mu_e over V_e and V_J, their parametric versions, and bridges.

A point of V_J = Z_N^{d+1} is an int array whose last axis has length d+1.
A point of V_e may be passed instead with last axis |e| (coordinates in
sorted-e order); it is lifted by zero-filling the other coordinates, which
no form supported inside e can see.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from . import estimator
from .errors import ConfigurationError, DomainError
from .estimator import DEFAULT_BUDGET, EstimatorResult
from .gt_measure import GreenTaoMeasure
from .simplex_forms import Edge, FormFamily, LinearForm, all_edges, subedges, top_edge


def lift(x, e: Edge, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if x.shape[-1] == d + 1:
        return x
    if x.shape[-1] != len(e):
        raise DomainError(f"point has {x.shape[-1]} coordinates; expected {len(e)} or {d + 1}")
    out = np.zeros(x.shape[:-1] + (d + 1,), dtype=np.int64)
    out[..., list(e)] = x
    return out


def eval_product(forms: Sequence[LinearForm], x: np.ndarray, measure: GreenTaoMeasure) -> np.ndarray:
    """prod_L nu_{axis(L)}(L(x) mod N), in the given order."""
    N = measure.n_cap
    out = np.ones(x.shape[:-1])
    for L in forms:
        out = out * measure.values[L.axis][L(x, N)]
    return out


@dataclass(frozen=True, eq=False)
class WeightSystem:
    family: FormFamily
    measure: GreenTaoMeasure
    edge_forms: dict[Edge, tuple[LinearForm, ...]] = field(init=False)

    def __post_init__(self):
        if self.measure.dim != self.family.d:
            raise ConfigurationError(f"measure has {self.measure.dim} coordinates, simplex has dimension {self.family.d}")
        if self.measure.n_cap != self.family.n_mod:
            raise ConfigurationError(f"measure is tabulated mod {self.measure.n_cap}, forms mod {self.family.n_mod}")
        groups: dict[Edge, tuple[LinearForm, ...]] = {e: () for e in all_edges(self.family.d)}
        for L in self.family.distinct_forms:
            key = tuple(sorted(L.support))
            groups[key] = groups[key] + (L,)
        object.__setattr__(self, "edge_forms", groups)

    @property
    def d(self) -> int:
        return self.family.d

    @property
    def n_mod(self) -> int:
        return self.family.n_mod

    def forms_inside(self, e: Edge) -> tuple[LinearForm, ...]:
        """Forms with support contained in e, in distinct_forms order."""
        s = set(e)
        return tuple(L for L in self.family.distinct_forms if L.support <= s)

    def weight_tables(self, e: Edge) -> dict[Edge, np.ndarray]:
        """nu_f tabulated on V_f (shape (N,)*|f|, axes in sorted-f order) for every nonempty f in e."""
        N = self.n_mod
        out = {}
        for f in subedges(e):
            grid = np.stack(np.meshgrid(*[np.arange(N)] * len(f), indexing="ij"), axis=-1)
            out[f] = nu_e(grid, f, self)
        return out


def nu_e(x, e: Edge, ws: WeightSystem) -> np.ndarray:
    e = tuple(sorted(e))
    return eval_product(ws.edge_forms.get(e, ()), lift(x, e, ws.d), ws.measure)


def mu_e(x, e: Edge, ws: WeightSystem) -> np.ndarray:
    e = tuple(sorted(e))
    return eval_product(ws.forms_inside(e), lift(x, e, ws.d), ws.measure)


def mu_e_factored(x, e: Edge, ws: WeightSystem) -> np.ndarray:
    """prod_{f in e} nu_f(x); equals mu_e by regrouping."""
    e = tuple(sorted(e))
    xj = lift(x, e, ws.d)
    out = np.ones(xj.shape[:-1])
    for f in subedges(e, include_empty=True):
        out = out * nu_e(xj, f, ws)
    return out


def _on_edge(fn, e: Edge, d: int):
    return lambda pts: fn(lift(pts, e, d))


def total_mass(
    e: Edge,
    ws: WeightSystem,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> EstimatorResult:
    """mu_e(V_e) = E_{x in V_e} mu_e(x)."""
    e = tuple(sorted(e))
    forms = ws.forms_inside(e)
    term = _on_edge(lambda x: eval_product(forms, x, ws.measure), e, ws.d)
    return estimator.estimate(
        term, (ws.n_mod,) * len(e), mode=mode, cost_per_point=len(forms), budget=budget,
        samples=samples, seed=seed, threads=threads,
    )


@dataclass(frozen=True)
class MarginalReport:
    lhs: EstimatorResult
    rhs: EstimatorResult
    gap: float


def marginal_consistency(
    g: np.ndarray,
    e: Edge,
    ws: WeightSystem,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> MarginalReport:
    """int_{V_e} g dmu_e against int_{V_J} (g o pi_e) dmu_J, for g tabulated on V_e."""
    e = tuple(sorted(e))
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (ws.n_mod,) * len(e):
        raise DomainError(f"g must have shape {(ws.n_mod,) * len(e)}")
    if np.any(np.abs(g) > 1):
        raise DomainError("g must be bounded by 1")
    inside, every = ws.forms_inside(e), ws.family.distinct_forms
    J = tuple(range(ws.d + 1))

    def lhs_term(x):
        return g[tuple(x[..., i] for i in e)] * eval_product(inside, x, ws.measure)

    def rhs_term(x):
        return g[tuple(x[..., i] for i in e)] * eval_product(every, x, ws.measure)

    opts = dict(mode=mode, budget=budget, samples=samples, seed=seed, threads=threads)
    lhs = estimator.estimate(_on_edge(lhs_term, e, ws.d), (ws.n_mod,) * len(e), cost_per_point=len(inside) + 1, **opts)
    rhs = estimator.estimate(_on_edge(rhs_term, J, ws.d), (ws.n_mod,) * len(J), cost_per_point=len(every) + 1, **opts)
    return MarginalReport(lhs, rhs, abs(lhs.value - rhs.value))


# ---------------------------------------------------------------------------
# parametric measures


@dataclass(frozen=True)
class ParamForm:
    """sum_i x_coeffs[i] x_i + sum_r q_coeffs[r] q_r, evaluated through nu_{axis}."""

    x_coeffs: tuple[int, ...]
    q_coeffs: tuple[int, ...]
    axis: int

    @property
    def x_support(self) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self.x_coeffs) if a != 0)

    def __call__(self, x: np.ndarray, q: np.ndarray, n_mod: int) -> np.ndarray:
        xs = np.asarray(x, dtype=np.int64) @ np.asarray(self.x_coeffs, dtype=np.int64)
        qs = np.asarray(q, dtype=np.int64) @ np.asarray(self.q_coeffs, dtype=np.int64)
        return np.mod(xs + qs, n_mod)


@dataclass(frozen=True, eq=False)
class ParametricWeightSystem:
    base: WeightSystem
    q_forms: tuple[ParamForm, ...]
    n_params: int

    def __post_init__(self):
        for P in self.q_forms:
            if not P.x_support:
                raise ConfigurationError("every parametric form must depend on some x-variable")
            if len(P.x_coeffs) != self.base.d + 1 or len(P.q_coeffs) != self.n_params:
                raise ConfigurationError("parametric form has the wrong number of coefficients")


def mu_parametric(x, e: Edge, q, pws: ParametricWeightSystem) -> np.ndarray:
    """mu_{q,e}(x): mu_e(x) times nu(L(q, x)) over parametric forms with x-support inside e."""
    e = tuple(sorted(e))
    xj = lift(x, e, pws.base.d)
    out = mu_e(xj, e, pws.base)
    s = set(e)
    N = pws.base.n_mod
    for P in pws.q_forms:
        if P.x_support <= s:
            out = out * pws.base.measure.values[P.axis][P(xj, q, N)]
    return out


def edge_extension(ws: WeightSystem, e: Edge) -> ParametricWeightSystem:
    """For |e| = 2 with q = (q_1, q_2) in V_e: mu_{q,e}(x) = nu_e(x_1, q_2) nu_e(q_1, x_2) mu_e(x)."""
    e = tuple(sorted(e))
    if len(e) != 2:
        raise ConfigurationError("the edge extension is implemented for |e| = 2")
    a, b = e
    out = []
    for L in ws.edge_forms[e]:
        xa = tuple(c if i == a else 0 for i, c in enumerate(L.coeffs))
        xb = tuple(c if i == b else 0 for i, c in enumerate(L.coeffs))
        out.append(ParamForm(xa, (0, L.coeffs[b]), L.axis))
        out.append(ParamForm(xb, (L.coeffs[a], 0), L.axis))
    return ParametricWeightSystem(ws, tuple(out), 2)


# ---------------------------------------------------------------------------
# bridges to the constellation side


def edge_indicator(A: np.ndarray, x: np.ndarray, j: int, ws: WeightSystem) -> np.ndarray:
    """1_{E_e}(x) for e = J \\ {j}: whether (L_e^1(x), ..., L_e^d(x)) lies in A."""
    N = ws.n_mod
    idx = tuple(ws.family.form(j, k)(x, N) for k in range(1, ws.d + 1))
    return A[idx]


def _check_set(A: np.ndarray, ws: WeightSystem) -> np.ndarray:
    A = np.asarray(A, dtype=bool)
    if A.shape != (ws.n_mod,) * ws.d:
        raise DomainError(f"A must be a boolean array of shape {(ws.n_mod,) * ws.d}")
    return A


def hypergraph_average(
    A: np.ndarray, ws: WeightSystem, mode: str = "exact", budget: int = DEFAULT_BUDGET,
    samples: int | None = None, seed: int | None = None, threads: int = 1,
) -> EstimatorResult:
    """E_{x in V_J} prod_{e in H_d} 1_{E_e}(x) mu_J(x)."""
    A = _check_set(A, ws)
    forms = ws.family.distinct_forms

    def term(x):
        ind = np.ones(x.shape[:-1], dtype=bool)
        for j in range(ws.d + 1):
            ind &= edge_indicator(A, x, j, ws)
        return np.where(ind, eval_product(forms, x, ws.measure), 0.0)

    return estimator.estimate(
        term, (ws.n_mod,) * (ws.d + 1), mode=mode, cost_per_point=len(forms) + ws.d * (ws.d + 1),
        budget=budget, samples=samples, seed=seed, threads=threads,
    )


def diagonal_average(
    A: np.ndarray, ws: WeightSystem, j_prime: int, mode: str = "exact", budget: int = DEFAULT_BUDGET,
    samples: int | None = None, seed: int | None = None, threads: int = 1,
) -> EstimatorResult:
    """E_{x in M} prod_e 1_{E_e}(x) mu_{e'}(x) with e' = J \\ {j'}, M parametrized by its e'-coordinates."""
    A = _check_set(A, ws)
    ep = top_edge(ws.d, j_prime)
    forms = ws.forms_inside(ep)
    N = ws.n_mod

    def term(y):
        x = np.zeros(y.shape[:-1] + (ws.d + 1,), dtype=np.int64)
        x[..., list(ep)] = y
        x[..., j_prime] = np.mod(-y.sum(axis=-1), N)
        ind = np.ones(y.shape[:-1], dtype=bool)
        for j in range(ws.d + 1):
            ind &= edge_indicator(A, x, j, ws)
        return np.where(ind, eval_product(forms, x, ws.measure), 0.0)

    return estimator.estimate(
        term, (N,) * ws.d, mode=mode, cost_per_point=len(forms) + ws.d * (ws.d + 1),
        budget=budget, samples=samples, seed=seed, threads=threads,
    )
