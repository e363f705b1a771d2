import numpy as np
import pytest

from primesimplex.gt_measure import GreenTaoMeasure, MeasureParams, Simplex, desk_r, tabulate_measure
from primesimplex.numtheory import build_sieve, build_wtrick
from primesimplex.simplex_forms import build_forms
from primesimplex.weight_system import WeightSystem

CORNER = "0,0;1,0;0,1"


@pytest.fixture(scope="session")
def sieve_small():
    return build_sieve(10**5 + 10)


def gt_measure(n_cap, residues, omega=2, sieve=None, r_value=None):
    sieve = sieve or build_sieve(30 * n_cap + 40)
    wt = build_wtrick(omega, sieve)
    params = MeasureParams(n_cap, wt, residues, r_value or desk_r(n_cap))
    return tabulate_measure(params, sieve)


def corner_system(n_mod, stub=False):
    delta = Simplex.parse(CORNER)
    fam = build_forms(delta, n_mod)
    m = GreenTaoMeasure.ones(n_mod, 2) if stub else gt_measure(n_mod, (1, 1))
    return WeightSystem(fam, m)


def random_measure(n_mod, dim, seed):
    """A synthetic positive measure table; exercises weights without sieve structure."""
    rng = np.random.default_rng(seed)
    return GreenTaoMeasure(rng.uniform(0.2, 2.0, size=(dim, n_mod)))


@pytest.fixture(scope="session")
def corner101():
    return corner_system(101)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion; failures re-raise."""

    class Recorder:
        def __init__(self):
            self.number = None
            self.detail = ""

        def __call__(self, number, detail=""):
            self.number, self.detail = number, detail

    rec = Recorder()
    yield rec
    if rec.number is not None:
        failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
        line = f"criterion {rec.number}: {'FAIL' if failed else 'PASS'}"
        if rec.detail:
            line += f" ({rec.detail})"
        ACCEPTANCE_LINES[rec.number] = line
        print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
