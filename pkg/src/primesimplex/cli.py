"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 a mathematical
property check failed.  A JSON config file (``--config``) supplies defaults
for any flag, using the flag's long name with dashes turned into
underscores; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections.abc import Sequence
from dataclasses import asdict

import numpy as np

from . import box_norm as bn
from . import constellations as cons
from . import lfc
from . import regularity_demo as rd
from .errors import BudgetExceededError, NumericalInconsistencyError, PrimeSimplexError
from .exact import is_prime_int
from .estimator import DEFAULT_BUDGET, block_generator, default_threads
from .gt_measure import GreenTaoMeasure, Simplex, l_delta
from .numtheory import build_sieve
from .simplex_forms import build_forms
from .weight_system import WeightSystem, total_mass

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class PropertyFailure(Exception):
    def __init__(self, message: str, payload: dict | None = None, text: str | None = None):
        super().__init__(message)
        self.payload = payload
        self.text = text


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2, which is reserved
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    return [int(p) for p in str(text).split(",") if p.strip()]


def _edge(text: str) -> tuple[int, ...]:
    return tuple(sorted(_int_list(text)))


# ---------------------------------------------------------------------------
# shared helpers


def _measure(args, n_cap: int, dim: int) -> GreenTaoMeasure:
    if args.stub_weights:
        return GreenTaoMeasure.ones(n_cap, dim)
    residues = _int_list(args.b)
    if len(residues) == 1:
        residues = residues * dim
    if len(residues) != dim:
        raise UsageError(f"need 1 or {dim} residues, got {len(residues)}")
    r_rule = args.r if args.r is not None else args.r_rule
    return lfc.make_measure(n_cap, args.omega, residues, r_rule, args.eps1, args.eps2)


def _check_mode(args) -> dict:
    if args.mode == "exact":
        if args.samples is not None:
            raise UsageError("--mode exact does not take --samples")
        return {}
    if args.samples is None or args.seed is None:
        raise UsageError("--mode mc requires --samples and --seed")
    return {"samples": args.samples, "seed": args.seed}


def _envelope(command: str, args, body: dict) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "out", "threads")}
    return {"schema_version": SCHEMA_VERSION, "command": command, "params": params, **body}


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands; each returns (payload dict, csv text or None, summary line)


def cmd_measure_profile(args):
    m = _measure(args, args.n, len(_int_list(args.b)))
    means = [m.mean(j) for j in range(m.dim)]
    window = list(m.params.window()) if m.params is not None else None
    buf = io.StringIO()
    m.write_csv(buf)
    body = {"means": means, "window": window, "n_cap": m.n_cap, "dim": m.dim}
    if args.format == "json":
        body["values"] = m.values.tolist()
    summary = "mean nu = " + ", ".join(f"{v:.6f}" for v in means)
    return _envelope("measure-profile", args, body), buf.getvalue(), summary


def _lfc_instance(args):
    if args.simplex:
        delta = Simplex.parse(args.simplex)
        fam = build_forms(delta, args.n)
        return lfc.LfcInstance.from_family(fam, _measure(args, args.n, delta.dim))
    rows = [_int_list(r) for r in args.forms.split(";") if r.strip()]
    axes = _int_list(args.axes) if args.axes else [0] * len(rows)
    dim = max(axes) + 1
    forms = tuple(lfc.LinearForm(tuple(r), a) for r, a in zip(rows, axes))
    return lfc.LfcInstance(forms, _measure(args, args.n, dim))


def cmd_lfc(args):
    mc = _check_mode(args)
    inst = _lfc_instance(args)
    est = lfc.lfc_estimate(inst, args.mode, args.budget, threads=args.threads, **mc)
    body = {"estimate": est.to_dict(), "abs_dev": abs(est.value - 1), "m": inst.m, "t": inst.t,
            "forms": [str(L) for L in inst.forms]}
    text = _csv_text(lfc.CSV_COLUMNS, [[args.n, args.omega, inst.m, inst.t, repr(est.value), repr(est.stderr),
                                        repr(abs(est.value - 1))]])
    return _envelope("lfc", args, body), text, f"E = {est.value:.6f} (|E-1| = {abs(est.value - 1):.6f})"


def _function_on_edge(kind: str, n_mod: int, dp: int, seed: int, density: float) -> np.ndarray:
    shape = (n_mod,) * dp
    if kind == "ones":
        return np.ones(shape)
    rng = block_generator(seed, 0)
    if kind == "random":
        return rng.uniform(-1.0, 1.0, size=shape)
    if kind == "random-set":
        G = rng.random(shape) < density
        return G - G.mean()
    if kind == "half-graph":
        if dp != 2:
            raise UsageError("half-graph needs a 2-edge")
        G = rd.half_graph(n_mod)
        return G - G.mean()
    raise UsageError(f"unknown function {kind!r}")


def cmd_boxnorm(args):
    mc = _check_mode(args)
    delta = Simplex.parse(args.simplex)
    e = _edge(args.edge)
    if not e or max(e) > delta.dim:
        raise UsageError(f"edge {e} is not inside J = 0..{delta.dim}")
    if args.stub_weights:
        weights = None
    else:
        ws = WeightSystem(build_forms(delta, args.n), _measure(args, args.n, delta.dim))
        weights = ws.weight_tables(e)
    F = _function_on_edge(args.function, args.n, len(e), args.seed or 0, args.density)
    try:
        res = bn.box_norm(F, e, weights, args.mode, args.budget, threads=args.threads, **mc)
    except NumericalInconsistencyError as exc:
        raise PropertyFailure(str(exc)) from exc
    body = {"raw_power": res.raw_power, "norm": res.norm, "estimator": res.estimator.to_dict(), "edge": list(e)}
    checks = {}
    if args.check and args.mode == "exact":
        rng = block_generator(args.seed or 0, 1)
        funcs = [F] + [rng.uniform(-1, 1, size=F.shape) for _ in range(2 ** len(e) - 1)]
        bound = max(1.0, float(np.max(np.abs(F))))
        g = bn.gcs_check(bn.CubeConfig(e, tuple(funcs), weights, bound=bound), budget=args.budget)
        t = bn.triangle_check(F, funcs[1], e, weights, budget=args.budget)
        checks = {"gcs": asdict(g), "triangle": t.triangle, "homogeneous": t.homogeneous}
        body["checks"] = checks
    text = _csv_text(["edge", "raw_power", "norm"], [[" ".join(map(str, e)), repr(res.raw_power), repr(res.norm)]])
    payload = _envelope("boxnorm", args, body)
    summary = f"box norm = {res.norm:.6f}"
    if checks and not (checks["gcs"]["holds"] and checks["triangle"] and checks["homogeneous"]):
        raise PropertyFailure("box-norm inequality violated", payload, text)
    return payload, text, summary


def _count_set(kind: str, n_cap: int, dim: int, seed: int, density: float) -> np.ndarray:
    shape = (n_cap,) * dim
    if kind == "primes":
        return cons.prime_box(n_cap, dim, build_sieve(max(n_cap, 2)))
    if kind == "all":
        return np.ones(shape, dtype=bool)
    if kind == "empty":
        return np.zeros(shape, dtype=bool)
    if kind == "random":
        return block_generator(seed, 0).random(shape) < density
    raise UsageError(f"unknown set {kind!r}")


def cmd_count(args):
    F = cons.PatternSet.parse(args.pattern)
    A = _count_set(args.set, args.n, F.dim, args.seed or 0, args.density)
    rep = cons.count_affine_copies(F, A, args.n, t_positive=not args.both_signs, include_zero=args.include_zero,
                                   threads=args.threads, budget=args.budget)
    body = {"report": asdict(rep), "pattern": str(F)}
    text = _csv_text(["N", "count", "predicted_scale", "ratio"], [rep.as_row()])
    return _envelope("count", args, body), text, f"{rep.total_pairs} copies (ratio {rep.ratio:.6f})"


def cmd_regdemo(args):
    N = args.n
    if args.set == "half-graph":
        G = rd.half_graph(N)
    elif args.set == "random":
        G = block_generator(args.seed or 0, 0).random((N, N)) < args.density
    elif args.set == "full":
        G = np.ones((N, N), dtype=bool)
    else:
        raise UsageError(f"unknown set {args.set!r}")
    if args.stub_weights or args.weights == "ones":
        w = rd.DemoWeights.ones(N)
    else:
        delta = Simplex.parse(args.simplex)
        ws = WeightSystem(build_forms(delta, N), _measure(args, N, delta.dim))
        w = rd.DemoWeights.from_system(ws, _edge(args.edge))
    trace = rd.kvn_loop(G, w, args.eps, args.max_iters, args.fraction)
    buf = io.StringIO()
    trace.write_jsonl(buf)
    body = {"converged": trace.converged, "reason": trace.reason, "iterations": trace.iterations,
            "iteration_bound": trace.iteration_bound, "trace": [asdict(r) for r in trace.records]}
    payload = _envelope("regdemo", args, body)
    energies = [r.energy for r in trace.records]
    if w.vertex_trivial and np.all(w.nu_e == 1) and any(b < a - 1e-12 for a, b in zip(energies, energies[1:])):
        raise PropertyFailure("energy decreased along accepted steps", payload, buf.getvalue())
    summary = f"{trace.iterations} iterations, residual {trace.records[-1].residual:.6f}, converged={trace.converged}"
    return payload, buf.getvalue(), summary


def cmd_forms(args):
    delta = Simplex.parse(args.simplex)
    N = args.n
    if N is None:
        N = next(p for p in range(delta.spread() + 1, 10 * delta.spread() + 100) if is_prime_int(p))
    fam = build_forms(delta, N)
    rows = [[j, k, str(fam.form(j, k)), " ".join(map(str, sorted(fam.form(j, k).support)))]
            for j in range(delta.dim + 1) for k in range(1, delta.dim + 1)]
    body = {
        "n_mod": N,
        "distinct_forms": [{"form": str(L), "axis": L.axis + 1, "support": sorted(L.support)} for L in fam.distinct_forms],
        "flags": dict(fam.flags),
        "l_delta": l_delta(delta),
        "count_matches": len(fam.distinct_forms) == l_delta(delta),
    }
    text = _csv_text(["j", "k", "form", "support"], rows)
    payload = _envelope("forms", args, body)
    if not all(fam.flags.values()) or not body["count_matches"]:
        raise PropertyFailure("form family failed a structural check", payload, text)
    summary = f"{len(fam.distinct_forms)} distinct forms, l(Delta) = {l_delta(delta)}, flags all true"
    return payload, text, summary


def cmd_sweep(args):
    mc = _check_mode(args)
    n_list = _int_list(args.n_list)
    if args.kind == "lfc":
        rows = [_int_list(r) for r in args.forms.split(";") if r.strip()]
        axes = _int_list(args.axes) if args.axes else [0] * len(rows)
        r_rule = args.r if args.r is not None else args.r_rule
        table = lfc.lfc_sweep(rows, axes, _int_list(args.b), n_list, _int_list(args.omega_list), args.mode,
                              args.budget, r_rule=r_rule, stub=args.stub_weights, threads=args.threads, **mc)
        buf = io.StringIO()
        table.write_csv(buf)
        payload = _envelope("sweep", args, table.to_dict(args.band))
        ok = all(table.monotonicity().values()) and all(table.terminal_band(args.band).values())
        summary = "lfc sweep: " + ", ".join(f"N={r.N} dev={r.abs_dev:.4f}" for r in table.rows)
    elif args.kind == "total-mass":
        delta = Simplex.parse(args.simplex)
        e = _edge(args.edge) if args.edge else tuple(range(delta.dim + 1))
        out = []
        for N in n_list:
            ws = WeightSystem(build_forms(delta, N), _measure(args, N, delta.dim))
            est = total_mass(e, ws, args.mode, args.budget, threads=args.threads, **mc)
            out.append([N, repr(est.value), repr(est.stderr), repr(abs(est.value - 1))])
        devs = [float(r[3]) for r in out]
        ses = [float(r[2]) for r in out]
        ok = all(devs[i + 1] <= devs[i] + 2 * np.hypot(ses[i], ses[i + 1]) for i in range(len(devs) - 1))
        buf = io.StringIO(_csv_text(["N", "estimate", "stderr", "abs_dev"], out))
        payload = _envelope("sweep", args, {"rows": [dict(zip(["N", "estimate", "stderr", "abs_dev"],
                                                               [r[0]] + [float(v) for v in r[1:]])) for r in out],
                                            "monotone": ok})
        summary = "total mass deviations: " + ", ".join(f"{d:.4f}" for d in devs)
    elif args.kind == "scaling":
        delta = Simplex.parse(args.simplex)
        table = cons.scaling_experiment(delta, n_list, not args.random_subset, args.density, args.seed or 0,
                                        args.threads, args.budget)
        buf = io.StringIO()
        table.write_csv(buf)
        payload = _envelope("sweep", args, {"rows": [asdict(r) for r in table.reports], "partial": table.partial,
                                            "band": table.band()})
        ok = True
        summary = f"scaling band max/min = {table.band():.4f}"
    elif args.kind == "unwrap":
        delta = Simplex.parse(args.simplex)
        eps_list = [float(x) for x in args.eps_list.split(",")]
        stats, thr = cons.unwrap_threshold_sweep(delta, n_list[0], eps_list)
        rows = [[repr(s.eps), s.wrapped, s.failures] for s in stats]
        buf = io.StringIO(_csv_text(["eps", "wrapped", "failures"], rows))
        payload = _envelope("sweep", args, {"rows": [asdict(s) for s in stats], "threshold": thr})
        ok = True
        summary = f"largest eps with no unwrap failures: {thr}"
    else:
        raise UsageError(f"unknown sweep kind {args.kind!r}")
    text = buf.getvalue()
    if not ok:
        raise PropertyFailure("sweep trend check failed", payload, text)
    return payload, text, summary


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, *, measure: bool = True, estimator: bool = True) -> None:
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=default_threads())
    p.add_argument("--seed", type=int, default=None)
    if measure:
        p.add_argument("--omega", type=int, default=2)
        p.add_argument("--b", default="1", help="residue(s), comma-separated")
        p.add_argument("--r", type=float, default=None, help="truncation R; overrides --r-rule")
        p.add_argument("--r-rule", choices=("sqrt", "asymptotic"), default="sqrt")
        p.add_argument("--eps1", type=float, default=0.2)
        p.add_argument("--eps2", type=float, default=0.4)
        p.add_argument("--stub-weights", action="store_true", help="replace nu by the constant 1")
    if estimator:
        p.add_argument("--mode", choices=("exact", "mc"), default="exact")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="primesimplex", description="Pseudo-random measures, box norms and prime constellations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure-profile", help="tabulate nu_b and report its mean")
    _common(p, estimator=False)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_measure_profile, format="csv")

    p = sub.add_parser("lfc", help="estimate E prod nu(L_i(x))")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--forms", default="1", help="coefficient rows, e.g. '1,0;0,1;1,1'")
    p.add_argument("--axes", default=None, help="residue index per form, e.g. '0,0,1'")
    p.add_argument("--simplex", default=None, help="use the form family of this simplex instead")
    p.set_defaults(func=cmd_lfc)

    p = sub.add_parser("boxnorm", help="weighted box norm of a test function on V_e")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--simplex", default="0,0;1,0;0,1")
    p.add_argument("--edge", default="1,2")
    p.add_argument("--function", choices=("ones", "random", "random-set", "half-graph"), default="ones")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--check", action="store_true", help="also run Gowers-Cauchy-Schwarz and triangle checks")
    p.set_defaults(func=cmd_boxnorm)

    p = sub.add_parser("count", help="count affine copies x + tF in a set")
    _common(p, measure=False, estimator=False)
    p.add_argument("--pattern", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--set", choices=("primes", "all", "empty", "random"), default="primes")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--include-zero", action="store_true")
    p.add_argument("--both-signs", action="store_true", help="also count negative t")
    p.add_argument("--budget", type=int, default=cons.COUNT_BUDGET)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("regdemo", help="energy-increment iteration on a 2-edge")
    _common(p, estimator=False)
    p.add_argument("--n", type=int, default=11)
    p.add_argument("--set", choices=("half-graph", "random", "full"), default="half-graph")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--max-iters", type=int, default=64)
    p.add_argument("--fraction", type=float, default=rd.DEFAULT_FRACTION)
    p.add_argument("--weights", choices=("ones", "gt"), default="ones")
    p.add_argument("--simplex", default="0,0;1,0;0,1")
    p.add_argument("--edge", default="1,2")
    p.set_defaults(func=cmd_regdemo)

    p = sub.add_parser("forms", help="list the linear forms of a simplex and their structural flags")
    _common(p, measure=False, estimator=False)
    p.add_argument("--simplex", required=True)
    p.add_argument("--n", type=int, default=None, help="prime modulus (default: smallest prime above the spread)")
    p.set_defaults(func=cmd_forms)

    p = sub.add_parser("sweep", help="parameter sweeps: lfc, total-mass, scaling, unwrap")
    _common(p)
    p.add_argument("--kind", choices=("lfc", "total-mass", "scaling", "unwrap"), required=True)
    p.add_argument("--n-list", required=True)
    p.add_argument("--omega-list", default="2")
    p.add_argument("--forms", default="1")
    p.add_argument("--axes", default=None)
    p.add_argument("--simplex", default="0,0;1,0;0,1")
    p.add_argument("--edge", default=None)
    p.add_argument("--band", type=float, default=0.25)
    p.add_argument("--random-subset", action="store_true")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--eps-list", default="0.05,0.1,0.2")
    p.set_defaults(func=cmd_sweep)
    return parser


def _config_path(argv: Sequence[str]) -> str | None:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    path = _config_path(argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    subs = parser._subparsers._group_actions[0].choices  # noqa: SLF001
    if path and command in subs:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        sub = subs[command]
        actions = {a.dest: a for a in sub._actions}  # noqa: SLF001
        unknown = sorted(set(cfg) - set(actions))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for key in cfg:
            actions[key].required = False
        sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def _emit(args, payload: dict, text: str | None) -> None:
    if args.format == "json" or text is None:
        out = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        out = text
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        payload, text, summary = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except PropertyFailure as exc:
        if exc.payload is not None:
            _emit(args, exc.payload, exc.text)
        print(f"property check failed: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PrimeSimplexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(args, payload, text)
    print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
