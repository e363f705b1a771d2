import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primesimplex.box_norm import (
    CubeConfig,
    box_norm,
    epsilon_regularity,
    gcs_check,
    gowers_inner,
    mu_table,
    resolve_weights,
    triangle_check,
    von_neumann_check,
)
from primesimplex.errors import BudgetExceededError, ConfigurationError, DomainError, NumericalInconsistencyError
from primesimplex.regularity_demo import half_graph
from primesimplex.simplex_forms import subedges

from conftest import corner_system


def naive_box_power_2(F):
    """Classical unweighted d'=2 box norm power, by a literal quadruple loop."""
    N = F.shape[0]
    tot = 0.0
    for x0, x1, q0, q1 in itertools.product(range(N), repeat=4):
        tot += F[x0, x1] * F[x0, q1] * F[q0, x1] * F[q0, q1]
    return tot / N**4


def naive_box_power_3(F):
    N = F.shape[0]
    tot = 0.0
    for x in itertools.product(range(N), repeat=3):
        for q in itertools.product(range(N), repeat=3):
            p = 1.0
            for om in itertools.product((0, 1), repeat=3):
                p *= F[tuple(q[i] if om[i] else x[i] for i in range(3))]
            tot += p
    return tot / N**6


def example1(F, na, nb, ne):
    """Example 1 of the weighted d'=2 expansion, transcribed literally."""
    N = F.shape[0]
    tot = 0.0
    for x0, x1, q0, q1 in itertools.product(range(N), repeat=4):
        tot += (
            F[x0, x1] * F[x0, q1] * F[q0, x1] * F[q0, q1]
            * na[x0] * na[q0] * nb[x1] * nb[q1]
            * ne[x0, x1] * ne[x0, q1] * ne[q0, x1] * ne[q0, q1]
        )
    return tot / N**4


def rand_weights(rng, N, e=(0, 1)):
    return {f: rng.uniform(0.2, 2.0, size=(N,) * len(f)) for f in subedges(e)}


def test_trivial_values():
    N = 7
    cfg = CubeConfig((0, 1), (np.ones((N, N)),))
    assert gowers_inner(cfg).value == 1.0
    assert box_norm(np.zeros((N, N)), (0, 1)).norm == 0.0
    assert box_norm(np.full((N, N), -0.4), (0, 1)).norm == pytest.approx(0.4, rel=1e-12)


@pytest.mark.parametrize("N", [5, 11])
def test_unweighted_oracle_d2(N):
    rng = np.random.default_rng(N)
    for _ in range(3):
        F = rng.uniform(-1, 1, size=(N, N))
        assert box_norm(F, (0, 1)).raw_power == pytest.approx(naive_box_power_2(F), rel=1e-10)


def test_unweighted_oracle_balanced_set():
    N = 11
    G = np.random.default_rng(0).random((N, N)) < 0.5
    F = G - G.mean()
    assert box_norm(F, (1, 2)).raw_power == pytest.approx(naive_box_power_2(F), rel=1e-10)


def test_unweighted_oracle_d3():
    N = 4
    F = np.random.default_rng(1).uniform(-1, 1, size=(N, N, N))
    assert box_norm(F, (0, 1, 2)).raw_power == pytest.approx(naive_box_power_3(F), rel=1e-10)


def test_example1_expansion():
    N = 6
    rng = np.random.default_rng(2)
    F = rng.uniform(-1, 1, size=(N, N))
    w = rand_weights(rng, N)
    got = box_norm(F, (0, 1), w).raw_power
    assert got == pytest.approx(example1(F, w[(0,)], w[(1,)], w[(0, 1)]), rel=1e-10)


def test_weight_system_weights_agree_with_tables():
    ws = corner_system(7)
    F = np.random.default_rng(3).uniform(-1, 1, size=(7, 7))
    t = ws.weight_tables((1, 2))
    a = box_norm(F, (1, 2), ws).raw_power
    b = example1(F, t[(1,)], t[(2,)], t[(1, 2)])
    assert a == pytest.approx(b, rel=1e-10)


def test_mc_matches_exact():
    N = 9
    rng = np.random.default_rng(4)
    F = rng.uniform(-1, 1, size=(N, N))
    w = rand_weights(rng, N)
    ex = box_norm(F, (0, 1), w).raw_power
    mc = box_norm(F, (0, 1), w, mode="mc", samples=400_000, seed=1)
    assert abs(mc.raw_power - ex) < 4 * mc.estimator.stderr


def test_nonnegativity_battery():
    rng = np.random.default_rng(5)
    for _ in range(50):
        N = int(rng.integers(3, 14))
        F = rng.uniform(-1, 1, size=(N, N))
        r = box_norm(F, (0, 1), rand_weights(rng, N))
        assert r.raw_power >= -1e-9 and r.norm >= 0


def test_negative_power_raises_or_warns():
    from primesimplex.box_norm import _root

    with pytest.warns(RuntimeWarning):
        assert _root(-1e-12, 2, True, 1e-9) == 0.0
    with pytest.raises(NumericalInconsistencyError):
        _root(-1.0, 2, True, 1e-9)
    assert _root(-0.5, 2, False, 1e-9) == 0.0


def test_homogeneity_and_triangle_battery():
    rng = np.random.default_rng(6)
    N = 7
    for _ in range(100):
        F = rng.uniform(-1, 1, size=(N, N))
        G = rng.uniform(-1, 1, size=(N, N))
        lam = float(rng.uniform(-3, 3))
        rep = triangle_check(F, G, (0, 1), rand_weights(rng, N), scale=lam)
        assert rep.holds, rep


def test_triangle_examples():
    F = np.random.default_rng(7).uniform(-1, 1, size=(7, 7))
    rep = triangle_check(F, -F, (0, 1))
    assert rep.norm_sum == 0.0 and rep.holds
    rep = triangle_check(F, F, (0, 1), scale=2.0)
    assert rep.norm_scaled == pytest.approx(2 * rep.norm_f, rel=1e-12)


def test_gcs_battery():
    rng = np.random.default_rng(8)
    for i in range(100):
        N = 7 if i % 2 else int(rng.integers(3, 12))
        fs = tuple(rng.uniform(-1, 1, size=(N, N)) for _ in range(4))
        cfg = CubeConfig((0, 1), fs, rand_weights(rng, N))
        assert gcs_check(cfg).holds


def test_gcs_examples():
    ws = corner_system(7)
    w = resolve_weights(ws, (0, 2))
    F = np.random.default_rng(9).uniform(-1, 1, size=(7, 7))
    rep = gcs_check(CubeConfig((0, 2), (F,) * 4, w))
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-9)
    zero = CubeConfig((0, 2), (F, F, np.zeros((7, 7)), F), w)
    assert gcs_check(zero).lhs == 0.0


def test_cube_config_validation():
    with pytest.raises(ConfigurationError):
        CubeConfig((0, 1), (np.ones((3, 3)),) * 3)
    with pytest.raises(DomainError):
        CubeConfig((0, 1), (2 * np.ones((3, 3)),))
    with pytest.raises(DomainError):
        CubeConfig((0, 1), (np.ones((3, 4)),))
    with pytest.raises(ConfigurationError):
        CubeConfig((0, 1), (np.ones((3, 3)),), {(0,): np.ones(3)})
    with pytest.raises(BudgetExceededError):
        box_norm(np.ones((13, 13)), (0, 1), budget=100)


def test_epsilon_regularity():
    N = 11
    assert epsilon_regularity(np.ones((N, N), bool), (0, 1)) == pytest.approx(0.0, abs=1e-12)
    assert epsilon_regularity(np.zeros((N, N), bool), (0, 1)) == 0.0
    assert epsilon_regularity(half_graph(N), (0, 1)) > 0.1


def test_mu_table():
    rng = np.random.default_rng(10)
    w = rand_weights(rng, 5)
    mt = mu_table(w, (0, 1), 5)
    assert mt[2, 3] == pytest.approx(w[(0,)][2] * w[(1,)][3] * w[(0, 1)][2, 3])
    assert np.all(mu_table(None, (0, 1), 5) == 1)


def test_von_neumann():
    ws = corner_system(7, stub=True)
    rng = np.random.default_rng(11)
    zero = von_neumann_check([np.zeros((7, 7))] * 3, ws)
    assert zero.lhs == 0.0
    for _ in range(10):
        fs = [rng.choice([-1.0, 1.0], size=(7, 7)) for _ in range(3)]
        rep = von_neumann_check(fs, ws)
        assert rep.lhs <= 4 * rep.min_norm + 1e-12
    with pytest.raises(DomainError):
        von_neumann_check([2 * np.ones((7, 7))] * 3, ws)


def test_von_neumann_weighted_reports_ratio():
    ws = corner_system(11)
    rng = np.random.default_rng(12)
    fs = []
    for _ in range(3):
        G = rng.random((11, 11)) < 0.5
        fs.append(G - G.mean())
    rep = von_neumann_check(fs, ws)
    assert math.isfinite(rep.ratio) and rep.ratio >= 0


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 8), st.floats(-2, 2), st.integers(0, 10**6))
def test_homogeneity_property(N, c, seed):
    F = np.random.default_rng(seed).uniform(-1, 1, size=(N, N))
    a = box_norm(F, (0, 1)).norm
    b = box_norm(c * F, (0, 1)).norm
    assert b == pytest.approx(abs(c) * a, rel=1e-9, abs=1e-12)
