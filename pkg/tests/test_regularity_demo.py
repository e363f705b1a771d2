import math

import numpy as np
import pytest

from primesimplex.box_norm import box_norm
from primesimplex.errors import DomainError
from primesimplex.estimator import block_generator
from primesimplex.regularity_demo import (
    DemoWeights,
    Partition,
    balanced_function,
    conditional_expectation,
    energy,
    gamma_aggregate,
    gamma_q,
    gamma_table,
    half_graph,
    increment_step,
    kvn_loop,
    l2_sq,
)

from conftest import corner_system

QUASI_EPS = 0.35  # separates random density-1/2 sets from the half-graph at N = 11


def random_set(N, seed, density=0.5):
    return block_generator(seed, 0).random((N, N)) < density


def random_weights(N, seed):
    rng = np.random.default_rng(seed)
    return DemoWeights(rng.uniform(0.5, 1.5, N), rng.uniform(0.5, 1.5, N), rng.uniform(0.5, 1.5, (N, N)))


def random_partition(N, seed, k=3):
    rng = np.random.default_rng(seed)
    return Partition(tuple(rng.random((N, N)) < 0.5 for _ in range(k)), N)


def test_partition_basics():
    N = 5
    p = Partition.trivial(N)
    assert p.n_atoms == 1 and p.complexity == 0
    q = random_partition(N, 0, k=3)
    assert q.n_atoms <= 8 and q.complexity == 3
    lab = np.arange(25).reshape(5, 5)
    s = Partition.from_labels(lab)
    assert s.n_atoms == 25
    assert len(np.unique(s.labels)) == 25
    with pytest.raises(DomainError):
        Partition((np.ones((3, 4), bool),), 3)


def test_conditional_expectation_examples():
    N = 5
    rng = np.random.default_rng(1)
    F = rng.uniform(-1, 1, (N, N))
    ones = np.ones((N, N))
    assert np.allclose(conditional_expectation(F, Partition.trivial(N), ones), F.mean())
    single = Partition.from_labels(np.arange(N * N).reshape(N, N))
    mu = rng.uniform(0, 2, (N, N))
    mu[0, 0] = 0.0
    ce = conditional_expectation(F, single, mu)
    assert np.allclose(ce[mu > 0], F[mu > 0])
    assert ce[0, 0] == 1.0  # zero-mass atom convention


def test_conditional_expectation_two_cells_by_hand():
    N = 5
    F = np.arange(25, dtype=float).reshape(N, N) / 25
    mu = np.fromfunction(lambda i, j: 1 + (i + 2 * j) % 3, (N, N))
    cell = np.zeros((N, N), bool)
    cell[:2] = True
    ce = conditional_expectation(F, Partition((cell,), N), mu)
    for mask in (cell, ~cell):
        num = sum(F[i, j] * mu[i, j] for i in range(N) for j in range(N) if mask[i, j])
        den = sum(mu[i, j] for i in range(N) for j in range(N) if mask[i, j])
        assert np.allclose(ce[mask], num / den)


def test_tower_and_pythagoras():
    N = 11
    for seed in range(10):
        rng = np.random.default_rng(seed)
        F = rng.uniform(-1, 1, (N, N))
        mu = rng.uniform(0, 2, (N, N))
        mu /= mu.mean()
        part = random_partition(N, seed + 100)
        ce = conditional_expectation(F, part, mu)
        assert np.allclose(conditional_expectation(ce, part, mu), ce, atol=1e-12)
        lhs = l2_sq(F, mu)
        rhs = l2_sq(ce, mu) + l2_sq(F - ce, mu)
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_energy_monotone_under_refinement():
    N = 11
    rng = np.random.default_rng(2)
    F = rng.uniform(-1, 1, (N, N))
    mu = rng.uniform(0, 2, (N, N))
    p = Partition.trivial(N)
    prev = energy(F, p, mu)
    for _ in range(6):
        p = p.refine(rng.random((N, N)) < 0.5)
        cur = energy(F, p, mu)
        assert cur >= prev - 1e-12
        prev = cur


def test_energy_constant():
    N = 7
    mu = np.random.default_rng(3).uniform(0, 2, (N, N))
    assert energy(np.full((N, N), 0.3), Partition.trivial(N), mu) == pytest.approx(0.09 * mu.mean())


def gamma_oracle(F, w, q):
    """Gamma(q) by direct summation of <F, u_q^1 u_q^2> under mu_{q,e}."""
    N = F.shape[0]
    q1, q2 = q
    mu = w.mu()
    tot = 0.0
    for x1 in range(N):
        for x2 in range(N):
            m = w.nu_e[x1, q2] * w.nu_e[q1, x2] * mu[x1, x2]
            tot += F[x1, x2] * F[x1, q2] * F[q1, x2] * F[q1, q2] * m
    return tot / N**2


def test_gamma_table_oracle():
    N = 7
    w = random_weights(N, 4)
    F = np.random.default_rng(5).uniform(-1, 1, (N, N))
    tab = gamma_table(F, w)
    for q in [(0, 0), (3, 5), (6, 1)]:
        assert tab[q] == pytest.approx(gamma_oracle(F, w, q), rel=1e-10)


@pytest.mark.parametrize("seed", range(20))
def test_gamma_aggregation(seed):
    N = 11
    G = random_set(N, seed)
    w = random_weights(N, seed) if seed % 2 else DemoWeights.from_system(corner_system(11), (1, 2))
    F = balanced_function(G, Partition.trivial(N), w.mu())
    agg = gamma_aggregate(F, w)
    box = box_norm(F, (0, 1), w.tables()).raw_power
    assert agg == pytest.approx(box, rel=1e-9, abs=1e-12)


def test_gamma_full_set_zero():
    N = 11
    w = DemoWeights.ones(N)
    G = np.ones((N, N), bool)
    assert gamma_q(G, Partition.trivial(N), (3, 4), w) == 0.0


def test_half_graph_gamma_large_on_big_set():
    N = 11
    w = DemoWeights.ones(N)
    G = half_graph(N)
    F = balanced_function(G, Partition.trivial(N), w.mu())
    eps = box_norm(F, (0, 1)).norm
    tab = gamma_table(F, w)
    share = np.mean(tab >= eps**4 / 4)
    assert share >= eps**8 / 8


def test_increment_half_graph():
    N = 11
    w = DemoWeights.ones(N)
    G = half_graph(N)
    base = Partition.trivial(N)
    eta = box_norm(balanced_function(G, base, w.mu()), (0, 1)).raw_power
    rep = increment_step(G, base, w, eta)
    assert rep.accepted and rep.increment > 0
    assert rep.increment == pytest.approx(rep.after - rep.before)
    assert rep.increment >= rep.required
    assert rep.partition.complexity <= base.complexity + 2
    assert rep.measures["mu_e"] == rep.measures["mu_qe"] == 1.0
    assert not rep.experimental
    assert rep.summary()["complexity"] == 2


def test_increment_declines_on_quasirandom():
    N = 11
    w = DemoWeights.ones(N)
    G = random_set(N, 3)
    rep = increment_step(G, Partition.trivial(N), w, QUASI_EPS**4)
    assert not rep.accepted and rep.partition is None
    assert rep.box_power < QUASI_EPS**4
    assert "declined" in rep.reason


def test_increment_threshold_at_box_power():
    N = 11
    w = DemoWeights.ones(N)
    G = half_graph(N)
    base = Partition.trivial(N)
    power = box_norm(balanced_function(G, base, w.mu()), (0, 1)).raw_power
    assert increment_step(G, base, w, 0.99 * power).accepted
    rep = increment_step(G, base, w, 1.01 * power)
    assert not rep.accepted and rep.increment == 0.0 and rep.after == rep.before


def test_kvn_half_graph_converges():
    N = 11
    w = DemoWeights.ones(N)
    tr = kvn_loop(half_graph(N), w, 0.1)
    assert tr.converged
    assert tr.records[-1].residual <= 0.1
    assert tr.iterations <= tr.iteration_bound
    energies = [r.energy for r in tr.records]
    assert all(b >= a - 1e-12 for a, b in zip(energies, energies[1:]))
    comps = [r.complexity for r in tr.records]
    assert all(0 <= b - a <= 2 for a, b in zip(comps, comps[1:]))


def test_kvn_zero_iterations():
    N = 11
    w = DemoWeights.ones(N)
    assert kvn_loop(random_set(N, 3), w, QUASI_EPS).iterations == 0
    assert kvn_loop(np.ones((N, N), bool), w, 0.1).iterations == 0
    assert kvn_loop(half_graph(N), w, QUASI_EPS).iterations == 1


def test_kvn_weighted_runs():
    N = 11
    w = DemoWeights.from_system(corner_system(11), (1, 2))
    tr = kvn_loop(half_graph(N), w, 0.2)
    assert tr.converged
    assert math.isfinite(tr.records[-1].energy)


def test_kvn_max_iters():
    N = 11
    tr = kvn_loop(half_graph(N), DemoWeights.ones(N), 0.1, max_iters=1)
    assert not tr.converged and tr.reason == "max_iters reached"


def test_kvn_jsonl():
    import io
    import json

    tr = kvn_loop(half_graph(11), DemoWeights.ones(11), 0.1)
    buf = io.StringIO()
    tr.write_jsonl(buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == len(tr.records)
    assert set(json.loads(lines[0])) == {"iteration", "energy", "residual", "complexity"}


def test_demo_weights_validation():
    with pytest.raises(DomainError):
        DemoWeights(np.ones(3), np.ones(4), np.ones((3, 3)))
    with pytest.raises(DomainError):
        kvn_loop(np.ones((3, 3), bool), DemoWeights.ones(4), 0.1)
