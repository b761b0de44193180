import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privdsgd.errors import InvalidDelta
from privdsgd.privacy import (
    PrivacySchedule,
    StepSizes,
    c_coefficient,
    cumulative_budget,
    epsilon_upper_bound,
    geometric_epsilon_bound,
    noise_std,
    per_step_epsilon,
    sample_noise,
    sensitivity_bound,
)
from privdsgd.simulator import make_schedules


def test_noise_std_examples():
    assert noise_std(0, PrivacySchedule(sigma_exp=0.2)) == 1.0
    assert noise_std(3, PrivacySchedule(sigma_exp=0.5)) == pytest.approx(2.0, abs=1e-15)
    assert noise_std(0, PrivacySchedule(sigma_exp=-0.1, noise_offset=5)) == pytest.approx(5**-0.1)
    assert noise_std(0, PrivacySchedule(sigma_exp=-0.1, noise_offset=5)) == pytest.approx(0.85134, abs=1e-5)


def test_schedule_validation():
    with pytest.raises(ValueError):
        PrivacySchedule(noise_offset=0)
    with pytest.raises(ValueError):
        PrivacySchedule(delta_exp=0)


def test_sample_noise_zero_std():
    np.testing.assert_array_equal(sample_noise(3, 0.0, np.random.default_rng(0)), np.zeros(3))


def test_sample_noise_variance():
    x = sample_noise(10**6, 2.0, np.random.default_rng(11))
    # sample variance of N(0, 4) has std 4 sqrt(2/N)
    assert abs(x.var(ddof=1) - 4.0) <= 4 * math.sqrt(2 / 10**6) * 4
    assert abs(x.mean()) <= 4 * 2 / 1000


def test_sample_noise_tail_fraction():
    x = sample_noise(10**6, 1.0, np.random.default_rng(12))
    expected = math.erfc(1.96 / math.sqrt(2))  # 0.04999579
    assert abs(expected - 0.05) < 1e-5
    assert abs(np.mean(np.abs(x) > 1.96) - expected) <= 0.001


def test_sensitivity_examples():
    sched = PrivacySchedule(C=0.2)
    assert sensitivity_bound(0, 0.01, 0.3, 50, sched) == pytest.approx(4.0e-5, rel=1e-12)
    for k in (0, 5, 100):
        assert sensitivity_bound(k, 0.01, 1.0, 50, sched) == pytest.approx(4.0e-5, rel=1e-12)
    assert sensitivity_bound(2, 1.0, 0.5, 1, PrivacySchedule(C=1.0)) == pytest.approx(1.75, rel=1e-14)


def _loop_sensitivity(k, a, b, g, C):
    total = 0.0
    for m in range(k + 1):
        total += abs(1 - b) ** m
    return a * C / g * total


@settings(max_examples=300, deadline=None)
@given(
    st.floats(1e-4, 1.0),
    st.floats(1e-3, 1.999),
    st.integers(1, 200),
    st.floats(1e-3, 5.0),
    st.integers(1, 300),
)
def test_sensitivity_recursion(a, b, g, C, k):
    sched = PrivacySchedule(C=C)
    prev = sensitivity_bound(k - 1, a, b, g, sched)
    cur = sensitivity_bound(k, a, b, g, sched)
    assert cur == pytest.approx(abs(1 - b) * prev + a * C / g, rel=1e-10)
    assert cur == pytest.approx(_loop_sensitivity(k, a, b, g, C), rel=1e-10)


def test_unit_ratio_branch():
    # |1 - beta| = 1 exactly when beta = 2 (or 0)
    sched = PrivacySchedule(C=1.0)
    assert sensitivity_bound(4, 0.5, 2.0, 1, sched) == pytest.approx(0.5 * 5)


def test_per_step_epsilon_examples():
    sched = PrivacySchedule(sigma_exp=0.0, noise_offset=1, delta_exp=3, C=1.0)
    steps = StepSizes(alpha_hat=1.0, beta_hat=0.5, gamma_hat=1)
    # Delta_0 = 1, delta_0 = 1, sigma_1 = 1
    eps0 = per_step_epsilon(0, steps, sched)
    assert eps0 == pytest.approx(2 * math.sqrt(math.log(1.25)), rel=1e-14)
    assert eps0 == pytest.approx(0.9448, abs=1e-4)

    zero = PrivacySchedule(C=0.0)
    assert np.all(np.asarray(per_step_epsilon(np.arange(10), steps, zero)) == 0)

    s1 = PrivacySchedule(sigma_exp=0.3, noise_offset=1, C=1.0)
    eps = per_step_epsilon(7, steps, s1)
    # sigma_{k+1} = 9^sigma; sigma_exp' with 9^sigma' = 2 * 9^sigma doubles the noise
    s2 = PrivacySchedule(sigma_exp=0.3 + math.log(2) / math.log(9), noise_offset=1, C=1.0)
    assert per_step_epsilon(7, steps, s2) == pytest.approx(eps / 2, rel=1e-12)


def test_invalid_delta():
    # 1.25 / delta_k <= 1 cannot happen for a valid schedule; duck-type one that allows it
    with pytest.raises(InvalidDelta):
        c_coefficient(10, SimpleNamespace(delta_exp=-1.0))


def test_budget_k0():
    sched = PrivacySchedule(sigma_exp=0.0, delta_exp=3, C=1.0)
    steps = StepSizes(1.0, 0.5, 1)
    led = cumulative_budget(0, steps, sched, delta_sum_start=0)
    eps0 = 2 * math.sqrt(math.log(1.25))
    assert led.total_epsilon == pytest.approx(eps0)
    assert led.delta_hat == pytest.approx(math.exp(eps0) * 1.0)
    assert led.delta_hat == pytest.approx(2.5722, abs=1e-4)


def test_budget_zero_sensitivity_delta_sum():
    sched = PrivacySchedule(C=0.0, delta_exp=3)
    led = cumulative_budget(2000, StepSizes(0.01, 0.001, 50), sched, delta_sum_start=1)
    direct_sum = sum(1 / (k + 1) ** 3 for k in range(1, 2001))
    direct_prod = 1.0
    for k in range(1, 2001):
        direct_prod *= 1 + 1 / (k + 1) ** 3
    assert led.total_epsilon == 0
    assert led.cum_delta == pytest.approx(direct_sum, rel=1e-12)
    assert led.cum_delta == pytest.approx(0.20206, abs=1e-5)
    assert led.delta_hat == pytest.approx(direct_prod - 1, rel=1e-12)


def test_budget_reference_cum_delta_both_indexings():
    s = make_schedules(0.35, 0.3, 0.24, 1.0, 0.75, 0.7, 2000)
    sched = PrivacySchedule(sigma_exp=0.1, noise_offset=5, delta_exp=3, C=0.2)
    assert cumulative_budget(2000, s, sched, 1).cum_delta == pytest.approx(0.2021, abs=5e-5)
    assert cumulative_budget(2000, s, sched, 0).cum_delta == pytest.approx(1.2021, abs=5e-5)


def test_budget_overflow_reports_inf():
    sched = PrivacySchedule(sigma_exp=-1.0, C=1e6)
    led = cumulative_budget(100, StepSizes(1.0, 0.5, 1), sched)
    assert led.total_epsilon > 709
    assert led.delta_hat == math.inf


def test_ledger_invariants():
    s = make_schedules(0.35, 0.3, 0.24, 1.0, 0.75, 0.7, 500)
    led = cumulative_budget(500, s, PrivacySchedule(0.1, 5, 3, 0.2))
    assert np.all(led.epsilon_k >= 0) and np.all(np.diff(led.cum_epsilon) >= 0)
    assert led.delta_hat >= 0


def _total_eps(sigma=0.1, gamma=0.7, alpha=1.0, beta=0.75, K=2000):
    s = make_schedules(0.35, 0.3, 0.24, alpha, beta, gamma, K)
    return cumulative_budget(K, s, PrivacySchedule(sigma, 5, 3, 0.2)).total_epsilon


@pytest.mark.parametrize(
    "param, values, direction",
    [
        ("sigma", [-0.1, 0.1, 0.2, 0.4], -1),
        ("gamma", [0.5, 0.6, 0.7, 0.8], -1),
        ("alpha", [0.8, 0.9, 1.0], -1),
        ("beta", [0.5, 0.6, 0.75], +1),
    ],
)
def test_budget_monotonicity(param, values, direction):
    totals = [_total_eps(**{param: v}) for v in values]
    diffs = np.diff(totals) * direction
    assert np.all(diffs > 0), totals


def test_epsilon_below_closed_form_bound():
    rng = np.random.default_rng(5)
    for _ in range(200):
        K = int(rng.integers(2, 5000))
        alpha, beta, gamma = rng.uniform(0.5, 1.0), rng.uniform(0.1, 0.9), rng.uniform(0.1, 1.0)
        a1, a3 = rng.uniform(0.01, 2), rng.uniform(0.01, 2)
        a2 = rng.uniform(0.01, min(5.0, K**beta * 0.999))
        sched = PrivacySchedule(rng.uniform(-0.5, 0.5), 1, rng.uniform(0.5, 4), rng.uniform(0.01, 2))
        s = make_schedules(a1, a2, a3, alpha, beta, gamma, K)
        k = np.arange(K + 1)
        eps = per_step_epsilon(k, s, sched)
        inter = geometric_epsilon_bound(k, s, sched)
        bound = epsilon_upper_bound(k, a1, a2, a3, alpha, beta, gamma, K, sched)
        assert np.all(eps <= inter * (1 + 1e-9))
        assert np.all(inter <= bound * (1 + 1e-9))


def test_delta_product_converges_at_reference_preset():
    s = make_schedules(0.35, 0.3, 0.24, 1.0, 0.75, 0.7, 2000)
    led = cumulative_budget(20000, s, PrivacySchedule(0.1, 5, 3, 0.2), 1)
    increments = led.delta_k[1:]
    assert np.all(increments[10**4:] < 1e-12)


def _eps_total_at_horizon(K, gamma):
    s = make_schedules(0.35, 0.3, 0.24, 1.0, 0.75, gamma, K)
    return cumulative_budget(K, s, PrivacySchedule(0.1, 5, 3, 0.2), 1).total_epsilon


def test_total_epsilon_vanishes_as_horizon_grows():
    # alpha + gamma - beta - (1 - sigma) = 0.85 leaves a wide margin
    totals = [_eps_total_at_horizon(K, 1.5) for K in (10**3, 10**4, 10**5, 10**6)]
    assert np.all(np.diff(totals) < 0), totals
    assert totals[-1] < 0.05
