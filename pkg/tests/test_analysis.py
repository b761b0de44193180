import math

import numpy as np
import pytest

from privdsgd.analysis import (
    consensus_error,
    fit_rate,
    high_prob_check,
    oracle_complexity,
    optimality_gap,
    theoretical_rate_exponent,
)
from privdsgd.errors import NonPositiveGap
from privdsgd.network import build_network
from privdsgd.problems import Problem, make_problem
from privdsgd.simulator import make_schedules, simulate


def test_consensus_examples():
    assert consensus_error(np.full((4, 3), 2.5)) == 0.0
    assert consensus_error(np.array([[1.0], [-1.0]])) == pytest.approx(2.0)
    x = np.random.default_rng(0).normal(size=(5, 3))
    assert consensus_error(x + np.array([1.0, -7.0, 3.0])) == pytest.approx(consensus_error(x), rel=1e-12)


@pytest.mark.parametrize("n, d", [(1, 1), (2, 3), (4, 2), (6, 5)])
def test_consensus_matches_projection(n, d):
    x = np.random.default_rng(n * 10 + d).normal(size=(n, d))
    W = np.eye(n) - np.ones((n, n)) / n
    Y = np.kron(W, np.eye(d)) @ x.reshape(-1)
    assert consensus_error(x) == pytest.approx(Y @ Y, rel=1e-12, abs=1e-14)


def test_optimality_gap_examples():
    q = make_problem("quadratic", 3, 3, 20, 1.0, np.random.default_rng(1))
    assert optimality_gap(q, q.minimizer) == pytest.approx(0.0, abs=1e-12)
    s = make_problem("sine-quadratic", 1, 3, 20, 1.0, np.random.default_rng(2))
    assert optimality_gap(s, np.zeros(1)) == pytest.approx(0.0, abs=1e-12)
    samples = np.array([[[1.0], [-1.0]], [[2.0], [-2.0]]])
    p = Problem("quadratic", 1, samples, 1.0, 1.0, 1.25, 0.0, 4.0, 2.0)
    assert optimality_gap(p, np.array([2.0])) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("scale, exponent", [(1.0, -1 / 3), (5.0, -0.5), (0.01, -1.2), (3.0, 0.25)])
def test_fit_rate_recovers_power_law(scale, exponent):
    k = np.arange(2001)
    gaps = np.empty(2001)
    gaps[0] = 1.0  # never used
    gaps[1:] = scale * k[1:].astype(float) ** exponent
    fit = fit_rate(gaps)
    assert fit.slope == pytest.approx(exponent, abs=1e-6)
    assert fit.intercept == pytest.approx(math.log(scale), abs=1e-6)
    assert fit.residual_rms < 1e-9
    assert (fit.k0, fit.k1) == (1000, 2000)


def test_fit_rate_window_and_errors():
    gaps = np.arange(1, 101, dtype=float) ** -0.5
    gaps = np.concatenate([[1.0], gaps])
    assert fit_rate(gaps, window=(10, 30)).n_points == 21
    with pytest.raises(ValueError):
        fit_rate(gaps, window=(10, 15))
    bad = gaps.copy()
    bad[80] = 0.0
    with pytest.raises(NonPositiveGap):
        fit_rate(bad)


def test_theoretical_exponent():
    assert theoretical_rate_exponent(1.0, 0.75, 0.1) == pytest.approx(0.25)
    assert theoretical_rate_exponent(1.0, 0.75, -0.1) == pytest.approx(0.25)
    assert theoretical_rate_exponent(0.9, 0.75, 0.0) == pytest.approx(0.05)


def test_high_prob_examples():
    rep = high_prob_check(np.full(50, 3.0), 0.1)
    assert rep.threshold == pytest.approx(30.0)
    assert rep.exceed_fraction == 0 and rep.passed

    x = np.random.default_rng(3).exponential(size=1000)
    rep = high_prob_check(x, 0.2)
    assert rep.threshold == pytest.approx(5 * x.mean())
    assert abs(rep.exceed_fraction - math.exp(-5 * x.mean())) < 0.01
    assert rep.passed

    two_point = np.array([0.0] * 900 + [10.0] * 100)
    rep = high_prob_check(two_point, 0.1)
    assert rep.threshold == pytest.approx(10.0)
    assert rep.exceed_fraction == 0.0  # strict inequality at the atom


def test_high_prob_preconditions():
    with pytest.raises(ValueError):
        high_prob_check(np.ones(19), 0.2)
    with pytest.raises(ValueError):
        high_prob_check(-np.ones(30), 0.2)


@pytest.mark.parametrize(
    "draw",
    [
        lambda r, m: np.full(m, 0.7),
        lambda r, m: r.uniform(0, 1, m),
        lambda r, m: r.exponential(2.0, m),
        lambda r, m: np.where(r.uniform(size=m) < 0.1, 10.0, 0.0),
        lambda r, m: np.abs(r.normal(size=m)),
    ],
    ids=["constant", "uniform", "exponential", "two-point", "half-normal"],
)
@pytest.mark.parametrize("delta_star", [0.05, 0.2, 0.5])
def test_markov_holds_for_standard_laws(draw, delta_star):
    x = draw(np.random.default_rng(4), 10**4)
    assert high_prob_check(x, delta_star).passed


def _gd_trajectory(K=400, gap_init=5.0):
    net = build_network(3, "ring")
    b = np.array([0.3])
    samples = np.broadcast_to(b, (3, 8, 1)).copy()
    p = Problem("quadratic", 1, samples, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0)
    s = make_schedules(0.35, 0.3, 0.24, 1.0, 0.75, 0.7, K)
    x0 = b + math.sqrt(2 * gap_init)
    return simulate(net, p, s, None, None, init=x0, full_batch=True), s


def test_oracle_complexity_closed_form():
    traj, s = _gd_trajectory()
    contraction = (1 - s.alpha_hat) ** 2
    for eta in (1.0, 0.0123, 1e-3):
        N = math.ceil(math.log(traj.initial_gap / eta) / math.log(1 / contraction))
        probe = oracle_complexity(traj, eta)
        assert probe.N_eta == N
        assert probe.total_samples == 3 * 8 * (N + 1)


def test_oracle_complexity_edges():
    traj, _ = _gd_trajectory(K=50)
    probe = oracle_complexity(traj, 10 * traj.initial_gap)
    assert probe.N_eta == 0 and probe.total_samples == 3 * 8
    missing = oracle_complexity(traj, 1e-30)
    assert not missing.reached and missing.total_samples is None
    Ns = [oracle_complexity(traj, eta).N_eta for eta in (4.0, 2.0, 1.0, 0.5)]
    assert Ns == sorted(Ns)
    with pytest.raises(ValueError):
        oracle_complexity(traj, 0.0)
