"""Weighted Gowers box norms on V_e.

Functions on V_e are arrays of shape (N,)*|e| with axes in sorted-e order.
Weights are a dict mapping every nonempty f in e to the table of nu_f on
V_f (axes in sorted-f order); ``None`` means the unweighted case nu = 1.
For x, q in V_e and omega in {0,1}^e, omega_e(x, q) picks q_i where
omega_i = 1 and x_i otherwise, and the inner product is

    E_{x,q} prod_omega F_omega(omega_e(x,q)) prod_{f in e} prod_{omega in {0,1}^f} nu_f(omega_f(x_f, q_f)).
"""

from __future__ import annotations

import itertools
import math
import string
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from . import estimator
from .errors import ConfigurationError, DomainError, NumericalInconsistencyError
from .estimator import DEFAULT_BUDGET, EstimatorResult
from .simplex_forms import Edge, subedges
from .weight_system import WeightSystem, eval_product, lift

TOLERANCE = 1e-9
Weights = Mapping[Edge, np.ndarray] | None


def resolve_weights(source, e: Edge) -> Weights:
    """Accept a WeightSystem, a ready weight dict, or None (unweighted)."""
    if source is None:
        return None
    if isinstance(source, WeightSystem):
        return source.weight_tables(e)
    return {tuple(sorted(f)): np.asarray(t, dtype=np.float64) for f, t in source.items()}


def cube_vertices(dp: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=dp))


@dataclass(frozen=True, eq=False)
class CubeConfig:
    """2^{|e|} functions F_omega (omega in lexicographic order) on V_e plus the weights."""

    edge: Edge
    functions: tuple[np.ndarray, ...]
    weights: Weights = None
    bound: float = 1.0

    def __post_init__(self):
        e = tuple(sorted(self.edge))
        object.__setattr__(self, "edge", e)
        funcs = tuple(np.asarray(F, dtype=np.float64) for F in self.functions)
        if len(funcs) == 1:
            funcs = funcs * (2 ** len(e))
        if len(funcs) != 2 ** len(e):
            raise ConfigurationError(f"need 1 or {2 ** len(e)} functions, got {len(funcs)}")
        shape = funcs[0].shape
        if len(shape) != len(e) or any(F.shape != shape for F in funcs) or len(set(shape)) != 1:
            raise DomainError("functions must all be arrays of shape (N,)*|e|")
        for F in funcs:
            if np.any(np.abs(F) > self.bound + 1e-12):
                raise DomainError(f"function exceeds its declared bound {self.bound}")
        object.__setattr__(self, "functions", funcs)
        if self.weights is not None:
            w = {tuple(sorted(f)): np.asarray(t, dtype=np.float64) for f, t in self.weights.items()}
            for f in subedges(e):
                if f not in w:
                    raise ConfigurationError(f"missing weight table for f={f}")
                if w[f].shape != (shape[0],) * len(f):
                    raise DomainError(f"weight table for f={f} has shape {w[f].shape}")
            object.__setattr__(self, "weights", w)

    @property
    def dp(self) -> int:
        return len(self.edge)

    @property
    def n_mod(self) -> int:
        return self.functions[0].shape[0]

    def n_factors(self) -> int:
        return 2**self.dp + (3**self.dp - 1 if self.weights is not None else 0)


@dataclass(frozen=True)
class BoxNormResult:
    raw_power: float
    norm: float
    estimator: EstimatorResult


def _einsum_operands(cfg: CubeConfig):
    e, dp = cfg.edge, cfg.dp
    xs, qs = string.ascii_lowercase[:dp], string.ascii_lowercase[dp : 2 * dp]
    pos = {v: i for i, v in enumerate(e)}
    specs, ops = [], []
    for om, F in zip(cube_vertices(dp), cfg.functions):
        specs.append("".join(qs[i] if om[i] else xs[i] for i in range(dp)))
        ops.append(F)
    if cfg.weights is not None:
        for f in subedges(e):
            for om in cube_vertices(len(f)):
                specs.append("".join(qs[pos[v]] if o else xs[pos[v]] for v, o in zip(f, om)))
                ops.append(cfg.weights[f])
    return specs, ops


def _mc_term(cfg: CubeConfig):
    e, dp = cfg.edge, cfg.dp
    pos = {v: i for i, v in enumerate(e)}

    def term(pts):
        x, q = pts[:, :dp], pts[:, dp:]
        out = np.ones(len(pts))
        for om, F in zip(cube_vertices(dp), cfg.functions):
            out = out * F[tuple(q[:, i] if om[i] else x[:, i] for i in range(dp))]
        if cfg.weights is not None:
            for f in subedges(e):
                for om in cube_vertices(len(f)):
                    idx = tuple(q[:, pos[v]] if o else x[:, pos[v]] for v, o in zip(f, om))
                    out = out * cfg.weights[f][idx]
        return out

    return term


def gowers_inner(
    cfg: CubeConfig,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> EstimatorResult:
    N, dp = cfg.n_mod, cfg.dp
    if mode == "exact":
        if samples is not None:
            raise ConfigurationError("mode='exact' does not take a sample count")
        terms = N ** (2 * dp)
        estimator.check_budget(terms * cfg.n_factors(), budget)
        specs, ops = _einsum_operands(cfg)
        total = float(np.einsum(",".join(specs) + "->", *ops, optimize="greedy"))
        return EstimatorResult(total / terms, "exact", terms, 0.0, None)
    return estimator.estimate(_mc_term(cfg), (N,) * (2 * dp), mode=mode, samples=samples, seed=seed, threads=threads)


def _root(raw: float, dp: int, exact: bool, tol: float) -> float:
    if raw < 0:
        if exact and dp >= 2 and raw < -10 * tol:
            raise NumericalInconsistencyError(f"box-norm power {raw!r} is negative beyond tolerance; check the weights")
        if exact:
            warnings.warn(f"box-norm power {raw!r} is slightly negative; treating it as 0", RuntimeWarning, stacklevel=3)
        return 0.0
    return raw ** (1.0 / 2**dp)


def box_norm(
    F: np.ndarray,
    e: Edge,
    weights=None,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
    tol: float = TOLERANCE,
) -> BoxNormResult:
    F = np.asarray(F, dtype=np.float64)
    e = tuple(sorted(e))
    bound = max(1.0, float(np.max(np.abs(F)))) if F.size else 1.0
    cfg = CubeConfig(e, (F,), resolve_weights(weights, e), bound=bound)
    est = gowers_inner(cfg, mode, budget, samples, seed, threads)
    return BoxNormResult(est.value, _root(est.value, cfg.dp, mode == "exact", tol), est)


@dataclass(frozen=True)
class GcsReport:
    lhs: float
    rhs: float
    holds: bool


def gcs_check(cfg: CubeConfig, mode: str = "exact", budget: int = DEFAULT_BUDGET, **mc) -> GcsReport:
    lhs = abs(gowers_inner(cfg, mode, budget, **mc).value)
    rhs = math.prod(box_norm(F, cfg.edge, cfg.weights, mode, budget, **mc).norm for F in cfg.functions)
    return GcsReport(lhs, rhs, lhs <= rhs * (1 + 1e-9))


@dataclass(frozen=True)
class TriangleReport:
    norm_f: float
    norm_g: float
    norm_sum: float
    norm_scaled: float
    scale: float
    triangle: bool
    homogeneous: bool

    @property
    def holds(self) -> bool:
        return self.triangle and self.homogeneous


def triangle_check(F: np.ndarray, G: np.ndarray, e: Edge, weights=None, scale: float = 2.0,
                   budget: int = DEFAULT_BUDGET) -> TriangleReport:
    """Semi-norm checks in exact mode: ||F+G|| <= ||F|| + ||G|| and ||lam F|| = |lam| ||F||."""
    e = tuple(sorted(e))
    w = resolve_weights(weights, e)
    nf = box_norm(F, e, w, budget=budget).norm
    ng = box_norm(G, e, w, budget=budget).norm
    ns = box_norm(np.asarray(F) + np.asarray(G), e, w, budget=budget).norm
    nl = box_norm(scale * np.asarray(F, dtype=np.float64), e, w, budget=budget).norm
    tri = ns <= nf + ng + 1e-9
    hom = math.isclose(nl, abs(scale) * nf, rel_tol=1e-9, abs_tol=1e-12)
    return TriangleReport(nf, ng, ns, nl, scale, tri, hom)


def mu_table(weights: Weights, e: Edge, n_mod: int) -> np.ndarray:
    """mu_e on V_e as prod_{f in e} nu_f, broadcast to shape (N,)*|e|."""
    e = tuple(sorted(e))
    out = np.ones((n_mod,) * len(e))
    if weights is None:
        return out
    pos = {v: i for i, v in enumerate(e)}
    for f in subedges(e):
        shape = [1] * len(e)
        for v in f:
            shape[pos[v]] = n_mod
        out = out * np.asarray(weights[f]).reshape(shape)
    return out


def epsilon_regularity(G: np.ndarray, e: Edge, weights=None, mode: str = "exact",
                       budget: int = DEFAULT_BUDGET, **mc) -> float:
    """||1_G - mu_e(G) 1_{V_e}||_box, with mu_e(G) = E_{x in V_e} 1_G(x) mu_e(x)."""
    G = np.asarray(G, dtype=bool)
    e = tuple(sorted(e))
    w = resolve_weights(weights, e)
    mass = estimator.stable_sum(np.where(G, mu_table(w, e, G.shape[0]), 0.0)) / G.size
    F = G.astype(np.float64) - mass
    return box_norm(F, e, w, mode, budget, **mc).norm


@dataclass(frozen=True)
class VonNeumannReport:
    lhs: float
    norms: dict[Edge, float]
    min_norm: float
    ratio: float


def von_neumann_check(
    functions: Mapping[Edge, np.ndarray] | Sequence[np.ndarray],
    ws: WeightSystem,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    floor: float = 1e-12,
    **mc,
) -> VonNeumannReport:
    """|E_{x in V_J} prod_e F_e(pi_e x) mu_J(x)| against min_e ||F_e||_{box nu_e}, e over the top edges.

    ``functions`` maps each top edge to its function, or lists them in the
    order e = J \\ {j}, j = 0..d.
    """
    d = ws.d
    tops = [tuple(i for i in range(d + 1) if i != j) for j in range(d + 1)]
    if not isinstance(functions, Mapping):
        functions = dict(zip(tops, functions))
    funcs = {e: np.asarray(functions[e], dtype=np.float64) for e in tops}
    for F in funcs.values():
        if np.any(np.abs(F) > 1):
            raise DomainError("von Neumann functions must be bounded by 1")
    forms = ws.family.distinct_forms

    def term(x):
        out = eval_product(forms, x, ws.measure)
        for e, F in funcs.items():
            out = out * F[tuple(x[..., i] for i in e)]
        return out

    est = estimator.estimate(lambda p: term(lift(p, tuple(range(d + 1)), d)), (ws.n_mod,) * (d + 1),
                             mode=mode, budget=budget, cost_per_point=len(forms) + len(tops), **mc)
    norms = {e: box_norm(F, e, ws, mode, budget, **mc).norm for e, F in funcs.items()}
    lhs = abs(est.value)
    mn = min(norms.values())
    return VonNeumannReport(lhs, norms, mn, lhs / max(mn, floor))
