"""Empirical linear forms condition: E_{x in Z_N^t} prod_i nu_{b_i}(L_i(x)) against 1."""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import TextIO

from . import estimator, exact
from .errors import ConfigurationError, DependentFormsError
from .estimator import DEFAULT_BUDGET, EstimatorResult
from .gt_measure import GreenTaoMeasure, MeasureParams, asymptotic_r, desk_r, tabulate_measure
from .numtheory import SieveContext, build_sieve, build_wtrick
from .simplex_forms import FormFamily, LinearForm
from .weight_system import eval_product


@dataclass(frozen=True, eq=False)
class LfcInstance:
    """Forms L_i over t variables; ``forms[i].axis`` selects the measure row nu_{b_i}."""

    forms: tuple[LinearForm, ...]
    measure: GreenTaoMeasure
    m0: int = 16
    t0: int = 4
    k0: int = 64
    ordered: tuple[LinearForm, ...] = field(init=False, repr=False)

    def __post_init__(self):
        forms = tuple(self.forms)
        if not forms:
            raise ConfigurationError("an instance needs at least one form")
        t = len(forms[0].coeffs)
        if any(len(L.coeffs) != t for L in forms):
            raise ConfigurationError("all forms must have the same number of variables")
        if len(forms) > self.m0 or t > self.t0:
            raise ConfigurationError(f"instance has m={len(forms)}, t={t}; limits are m0={self.m0}, t0={self.t0}")
        if any(abs(a) > self.k0 for L in forms for a in L.coeffs):
            raise ConfigurationError(f"coefficients must be at most k0={self.k0} in absolute value")
        if any(not 0 <= L.axis < self.measure.dim for L in forms):
            raise ConfigurationError("form axis does not index a measure row")
        for L in forms:
            if not L.support:
                raise DependentFormsError(f"form {L} is zero")
        for i in range(len(forms)):
            for j in range(i + 1, len(forms)):
                if exact.proportional(forms[i].coeffs, forms[j].coeffs):
                    raise DependentFormsError(f"forms {forms[i]} and {forms[j]} are rational multiples")
        object.__setattr__(self, "forms", forms)
        # canonical evaluation order makes the product independent of how forms were listed
        object.__setattr__(self, "ordered", tuple(sorted(forms, key=lambda L: (L.axis, L.coeffs))))

    @property
    def m(self) -> int:
        return len(self.forms)

    @property
    def t(self) -> int:
        return len(self.forms[0].coeffs)

    @property
    def n_mod(self) -> int:
        return self.measure.n_cap

    @classmethod
    def from_family(cls, family: FormFamily, measure: GreenTaoMeasure) -> LfcInstance:
        return cls(family.distinct_forms, measure)

    def with_stub(self) -> LfcInstance:
        return LfcInstance(self.forms, GreenTaoMeasure.ones(self.n_mod, self.measure.dim), self.m0, self.t0, self.k0)


def resolve_r(n_cap: int, r_rule: str | float, dim: int) -> float:
    if isinstance(r_rule, (int, float)) and not isinstance(r_rule, bool):
        return float(r_rule)
    if r_rule == "sqrt":
        return desk_r(n_cap)
    if r_rule == "asymptotic":
        return asymptotic_r(n_cap, dim)
    raise ConfigurationError(f"unknown R rule {r_rule!r}; use 'sqrt', 'asymptotic' or a number")


def make_measure(
    n_cap: int,
    omega: int,
    residues: Sequence[int],
    r_rule: str | float = "sqrt",
    eps1: float = 0.2,
    eps2: float = 0.4,
    sieve: SieveContext | None = None,
) -> GreenTaoMeasure:
    """Tabulate nu_{b_j} mod n_cap for each residue, building a large enough sieve if none is given."""
    if sieve is None:
        probe = build_sieve(max(omega, 2))
        w = build_wtrick(omega, probe).w
        sieve = build_sieve(max(w * n_cap + max(residues), math.floor(resolve_r(n_cap, r_rule, len(residues))) + 1, omega))
    wt = build_wtrick(omega, sieve)
    params = MeasureParams(n_cap, wt, tuple(residues), resolve_r(n_cap, r_rule, len(residues)), eps1, eps2)
    return tabulate_measure(params, sieve)


def build_instance(
    coeff_rows: Sequence[Sequence[int]],
    axes: Sequence[int],
    residues: Sequence[int],
    n_cap: int,
    omega: int,
    r_rule: str | float = "sqrt",
    eps1: float = 0.2,
    eps2: float = 0.4,
    sieve: SieveContext | None = None,
) -> LfcInstance:
    """Forms given by coefficient rows; form i uses residue ``residues[axes[i]]``."""
    forms = tuple(LinearForm(tuple(r), int(a)) for r, a in zip(coeff_rows, axes, strict=True))
    return LfcInstance(forms, make_measure(n_cap, omega, residues, r_rule, eps1, eps2, sieve))


def lfc_estimate(
    inst: LfcInstance,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> EstimatorResult:
    forms = inst.ordered
    return estimator.estimate(
        lambda x: eval_product(forms, x, inst.measure), (inst.n_mod,) * inst.t, mode=mode,
        cost_per_point=inst.m, budget=budget, samples=samples, seed=seed, threads=threads,
    )


@dataclass(frozen=True)
class SweepRow:
    N: int
    omega: int
    m: int
    t: int
    estimate: float
    stderr: float
    abs_dev: float


CSV_COLUMNS = ["N", "omega", "m", "t", "estimate", "stderr", "abs_dev"]


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]

    def by_omega(self) -> dict[int, list[SweepRow]]:
        out: dict[int, list[SweepRow]] = {}
        for r in self.rows:
            out.setdefault(r.omega, []).append(r)
        for v in out.values():
            v.sort(key=lambda r: r.N)
        return out

    def monotonicity(self, k_sigma: float = 2.0) -> dict[int, bool]:
        """Per omega: abs_dev weakly decreasing along N, allowing k_sigma combined standard errors."""
        rep = {}
        for om, rows in self.by_omega().items():
            rep[om] = all(
                b.abs_dev <= a.abs_dev + k_sigma * math.hypot(a.stderr, b.stderr) for a, b in zip(rows, rows[1:])
            )
        return rep

    def terminal_band(self, band: float = 0.25) -> dict[int, bool]:
        return {om: rows[-1].abs_dev <= band for om, rows in self.by_omega().items()}

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.N, r.omega, r.m, r.t, repr(r.estimate), repr(r.stderr), repr(r.abs_dev)])

    def to_dict(self, band: float = 0.25, k_sigma: float = 2.0) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "monotone": {str(k): v for k, v in self.monotonicity(k_sigma).items()},
            "terminal_band": {str(k): v for k, v in self.terminal_band(band).items()},
            "band": band,
        }

    def to_json(self, band: float = 0.25, k_sigma: float = 2.0) -> str:
        return json.dumps(self.to_dict(band, k_sigma), sort_keys=True)


def lfc_sweep(
    coeff_rows: Sequence[Sequence[int]],
    axes: Sequence[int],
    residues: Sequence[int],
    n_list: Sequence[int],
    omega_list: Sequence[int],
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    samples: int | None = None,
    seed: int | None = None,
    r_rule: str | float = "sqrt",
    stub: bool = False,
    threads: int = 1,
) -> SweepTable:
    rows = []
    for omega in omega_list:
        for N in n_list:
            if stub:
                forms = tuple(LinearForm(tuple(r), int(a)) for r, a in zip(coeff_rows, axes, strict=True))
                inst = LfcInstance(forms, GreenTaoMeasure.ones(N, len(residues)))
            else:
                inst = build_instance(coeff_rows, axes, residues, N, omega, r_rule)
            est = lfc_estimate(inst, mode, budget, samples, seed, threads)
            rows.append(SweepRow(N, omega, inst.m, inst.t, est.value, est.stderr, abs(est.value - 1.0)))
    return SweepTable(tuple(rows))


def single_form(n_cap: int, omega: int, b: int, r_rule: str | float = "sqrt") -> LfcInstance:
    """The m = t = 1 instance L(x) = x."""
    return build_instance([[1]], [0], [b], n_cap, omega, r_rule)

