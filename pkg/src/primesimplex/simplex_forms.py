"""The linear-form family attached to a simplex, its structural checks, and the map Phi.

For Delta = {v_0, ..., v_d} and e = J \\ {j} (J = {0..d}) the forms are

    L_e^k(x) = sum_i x_i (v_i^k - v_j^k),    k = 1..d,

acting on x in Z_N^{d+1}.  Forms are kept with exact integer coefficients and
reduced mod N only when evaluated.  The family is treated as a *set*: forms
that coincide for different (e, k) contribute one factor to every product.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import exact
from .errors import ModulusError
from .gt_measure import Simplex

Edge = tuple[int, ...]


@dataclass(frozen=True)
class LinearForm:
    """sum_i coeffs[i] * x_i, evaluated through nu_{b_axis}."""

    coeffs: tuple[int, ...]
    axis: int = 0
    support: frozenset[int] = field(init=False, compare=False)

    def __post_init__(self):
        c = tuple(int(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "support", frozenset(i for i, a in enumerate(c) if a != 0))

    def __call__(self, x, n_mod: int):
        """Evaluate on points ``x[..., i]`` and reduce into [0, n_mod)."""
        x = np.asarray(x, dtype=np.int64)
        return np.mod(x @ np.asarray(self.coeffs, dtype=np.int64), n_mod)

    def __str__(self) -> str:
        out = ""
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            mag = "" if abs(a) == 1 else f"{abs(a)}*"
            if not out:
                out = ("-" if a < 0 else "") + f"{mag}x_{i}"
            else:
                out += (" - " if a < 0 else " + ") + f"{mag}x_{i}"
        return out or "0"

    def normalized(self) -> LinearForm:
        """Sign-normalized copy (first nonzero coefficient positive), for display only."""
        lead = next((a for a in self.coeffs if a != 0), 1)
        return self if lead > 0 else LinearForm(tuple(-a for a in self.coeffs), self.axis)


def all_edges(d: int) -> list[Edge]:
    """Every subset of J = {0..d} as a sorted tuple, by size then lexicographically."""
    J = range(d + 1)
    return [e for r in range(d + 2) for e in itertools.combinations(J, r)]


def subedges(e: Edge, *, include_empty: bool = False) -> list[Edge]:
    lo = 0 if include_empty else 1
    return [f for r in range(lo, len(e) + 1) for f in itertools.combinations(e, r)]


@dataclass(frozen=True)
class HypergraphSystem:
    d: int
    n_mod: int

    def __post_init__(self):
        if not exact.is_prime_int(self.n_mod):
            raise ModulusError(f"N={self.n_mod} must be prime")

    @property
    def j_set(self) -> tuple[int, ...]:
        return tuple(range(self.d + 1))

    @property
    def edges(self) -> list[Edge]:
        return all_edges(self.d)

    @property
    def top_edges(self) -> list[Edge]:
        """H_d: the faces J \\ {j}, listed in order j = 0..d."""
        return [tuple(i for i in self.j_set if i != j) for j in self.j_set]


def top_edge(d: int, j: int) -> Edge:
    return tuple(i for i in range(d + 1) if i != j)


@dataclass(frozen=True, eq=False)
class FormFamily:
    delta: Simplex
    n_mod: int
    forms: Mapping[tuple[Edge, int], LinearForm]
    distinct_forms: tuple[LinearForm, ...] = field(init=False)
    flags: Mapping[str, bool] = field(init=False)

    def __post_init__(self):
        d = self.delta.dim
        forms = {(top_edge(d, j), k): self.forms[(top_edge(d, j), k)] for j in range(d + 1) for k in range(1, d + 1)}
        object.__setattr__(self, "forms", forms)
        seen: dict[LinearForm, None] = {}
        for L in forms.values():
            seen.setdefault(L, None)
        object.__setattr__(self, "distinct_forms", tuple(seen))
        flags = {
            "well_defined": check_well_defined(self)[0],
            "pairwise_independent": check_pairwise_independent(self)[0],
            "symmetric": check_symmetric(self, trials=32, seed=0),
        }
        object.__setattr__(self, "flags", flags)

    @property
    def d(self) -> int:
        return self.delta.dim

    def form(self, j: int, k: int) -> LinearForm:
        """L_e^k for e = J \\ {j}, with 1 <= k <= d."""
        return self.forms[(top_edge(self.d, j), k)]

    def replace_form(self, j: int, k: int, form: LinearForm) -> FormFamily:
        """A copy with one form swapped out; flags are recomputed."""
        forms = dict(self.forms)
        forms[(top_edge(self.d, j), k)] = form
        return FormFamily(self.delta, self.n_mod, forms)


def raw_form(delta: Simplex, j: int, k: int) -> LinearForm:
    vj = delta.vertices[j][k - 1]
    return LinearForm(tuple(v[k - 1] - vj for v in delta.vertices), axis=k - 1)


def build_forms(delta: Simplex, n_mod: int) -> FormFamily:
    HypergraphSystem(delta.dim, n_mod)
    if n_mod <= delta.spread():
        raise ModulusError(f"N={n_mod} must exceed the coordinate spread {delta.spread()} of the simplex")
    d = delta.dim
    forms = {(top_edge(d, j), k): raw_form(delta, j, k) for j in range(d + 1) for k in range(1, d + 1)}
    return FormFamily(delta, n_mod, forms)


def check_well_defined(family: FormFamily) -> tuple[bool, tuple[Edge, Edge, int] | None]:
    """supp(L_{e'}^k) in e  <=>  v_j^k = v_{j'}^k  <=>  L_{e'}^k = L_e^k, for all e, e', k."""
    d = family.d
    verts = family.delta.vertices
    for k in range(1, d + 1):
        for j in range(d + 1):
            e = top_edge(d, j)
            for jp in range(d + 1):
                ep = top_edge(d, jp)
                Lp = family.forms[(ep, k)]
                a = Lp.support <= set(e)
                b = verts[j][k - 1] == verts[jp][k - 1]
                c = Lp == family.forms[(e, k)]
                if not a == b == c:
                    return False, (e, ep, k)
    return True, None


def check_pairwise_independent(
    forms: FormFamily | Iterable[LinearForm],
) -> tuple[bool, tuple[LinearForm, LinearForm] | None]:
    """Every form nonzero and no two distinct forms rational multiples of each other."""
    pool = list(forms.distinct_forms if isinstance(forms, FormFamily) else dict.fromkeys(forms))
    for L in pool:
        if not L.support:
            return False, (L, L)
    for L1, L2 in itertools.combinations(pool, 2):
        if exact.proportional(L1.coeffs, L2.coeffs):
            return False, (L1, L2)
    return True, None


def _diagonal_points(rng: np.random.Generator, trials: int, d: int, n_mod: int) -> np.ndarray:
    x = rng.integers(0, n_mod, size=(trials, d + 1))
    x[:, 0] = np.mod(-x[:, 1:].sum(axis=1), n_mod)
    return x


def check_symmetric(family: FormFamily, trials: int = 100, seed: int = 0) -> bool:
    """L_e^k = L_{e'}^k on M = {sum x_i = 0} for all e, e', k.

    Algebraically the difference of two forms vanishes on M iff its
    coefficients are all equal; the randomized pass re-checks by evaluation
    mod N on ``trials`` points of M.
    """
    d, N = family.d, family.n_mod
    for k in range(1, d + 1):
        ref = family.forms[(top_edge(d, 0), k)]
        for j in range(1, d + 1):
            L = family.forms[(top_edge(d, j), k)]
            diff = {a - b for a, b in zip(L.coeffs, ref.coeffs)}
            if len(diff) != 1:
                return False
    if trials <= 0:
        return True
    rng = np.random.Generator(np.random.Philox(key=seed))
    x = _diagonal_points(rng, trials, d, N)
    for k in range(1, d + 1):
        ref = family.forms[(top_edge(d, 0), k)](x, N)
        for j in range(1, d + 1):
            if not np.array_equal(family.forms[(top_edge(d, j), k)](x, N), ref):
                return False
    return True


def phi_matrix(delta: Simplex) -> list[list[int]]:
    """Integer matrix of Phi(x) = (sum x_i v_i, -sum x_i); rows are output coordinates."""
    d = delta.dim
    rows = [[v[k] for v in delta.vertices] for k in range(d)]
    rows.append([-1] * (d + 1))
    return rows


def phi_is_bijective(delta: Simplex, n_mod: int) -> bool:
    return exact.det(phi_matrix(delta)) % n_mod != 0


def phi_map(x, delta: Simplex, n_mod: int) -> tuple[np.ndarray, np.ndarray]:
    """Phi(x) = (y, t) for points ``x[..., i]`` in Z_N^{d+1}."""
    x = np.asarray(x, dtype=np.int64)
    verts = np.asarray(delta.vertices, dtype=np.int64)
    y = np.mod(x @ verts, n_mod)
    t = np.mod(-x.sum(axis=-1), n_mod)
    return y, t


def phi_inverse(y, t, delta: Simplex, n_mod: int) -> np.ndarray:
    inv = np.asarray(exact.inverse_mod(phi_matrix(delta), n_mod), dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    yt = np.concatenate([y, t[..., None]], axis=-1)
    return np.mod(yt @ inv.T, n_mod)


def diagonal_section(y: Sequence[int], e_prime: Edge, n_mod: int) -> np.ndarray:
    """The unique x in M = {sum x_i = 0} with pi_{e'}(x) = y.

    ``y`` lists the coordinates x_i for i in ``e_prime`` (sorted); the
    missing coordinate is fixed by the diagonal constraint.
    """
    d = len(e_prime)
    (jp,) = set(range(d + 1)) - set(e_prime)
    x = np.zeros(d + 1, dtype=np.int64)
    x[list(e_prime)] = np.asarray(y, dtype=np.int64) % n_mod
    x[jp] = (-x.sum()) % n_mod
    return x
