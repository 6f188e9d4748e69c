import numpy as np
import pytest

from innosim.config import WorldConfig, uniform_profiles
from innosim.errors import ConfigError, EnumerationBudgetExceeded
from innosim.montecarlo import (exact_expected_payoffs, expected_payoffs,
                                per_rep_firm_means, rep_rng, simulate_once)

WORLD = WorldConfig(n=30, k=3, delta=0.8)
PROFILES = uniform_profiles(30, p=0.7, q=0.15)


def test_rep_rng_streams():
    a = rep_rng(42, 3, (11,)).random(8)
    b = rep_rng(42, 3, (11,)).random(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, rep_rng(42, 4, (11,)).random(8))
    assert not np.array_equal(a, rep_rng(42, 3, (13,)).random(8))
    assert not np.array_equal(a, rep_rng(43, 3, (11,)).random(8))


def test_simulate_once_shapes():
    net, kstate, report = simulate_once(WORLD, PROFILES, rep_rng(1, 0))
    assert net.n == 30
    assert len(kstate.learned) == 30
    assert report.n == 30


def test_expected_payoffs_deterministic():
    a = expected_payoffs(WORLD, PROFILES, reps=60, seed=9)
    b = expected_payoffs(WORLD, PROFILES, reps=60, seed=9)
    assert np.array_equal(a.net_mean, b.net_mean)
    assert np.array_equal(a.net_se, b.net_se)
    c = expected_payoffs(WORLD, PROFILES, reps=60, seed=10)
    assert not np.array_equal(a.net_mean, c.net_mean)
    d = expected_payoffs(WORLD, PROFILES, reps=60, seed=9, key=(5,))
    assert not np.array_equal(a.net_mean, d.net_mean)


def test_expected_payoffs_thread_invariant():
    a = expected_payoffs(WORLD, PROFILES, reps=40, seed=9)
    b = expected_payoffs(WORLD, PROFILES, reps=40, seed=9, threads=3)
    assert np.array_equal(a.net_mean, b.net_mean)
    assert np.array_equal(a.pt_mean, b.pt_mean)
    assert np.array_equal(a.gross_mean, b.gross_mean)


def test_expected_payoffs_argument_checks():
    with pytest.raises(ConfigError):
        expected_payoffs(WORLD, PROFILES, reps=0, seed=1)
    single = expected_payoffs(WORLD, PROFILES, reps=1, seed=1)
    assert np.all(single.net_se == 0.0)


def test_per_rep_firm_means_matches_summary():
    reps = 50
    per_rep = per_rep_firm_means(WORLD, PROFILES, reps=reps, seed=4)
    assert per_rep.shape == (reps,)
    summary = expected_payoffs(WORLD, PROFILES, reps=reps, seed=4)
    assert float(np.mean(per_rep)) == pytest.approx(summary.mean_net, rel=1e-12)


@pytest.mark.parametrize("delta", [0.0, 1.0])
def test_exact_matches_monte_carlo(delta):
    world = WorldConfig(n=4, k=2, delta=delta)
    profiles = uniform_profiles(4, p=0.6, q=0.35)
    exact = exact_expected_payoffs(world, profiles)
    mc = expected_payoffs(world, profiles, reps=2000, seed=7)
    for i in range(4):
        tol = 3.5 * mc.net_se[i] + 1e-9
        assert abs(exact[i] - mc.net_mean[i]) <= tol, \
            f"firm {i}: exact {exact[i]} vs mc {mc.net_mean[i]} +- {mc.net_se[i]}"


def test_exact_rejects_partial_indirect():
    world = WorldConfig(n=3, k=2, delta=0.5)
    with pytest.raises(ConfigError, match="delta 0 or 1"):
        exact_expected_payoffs(world, uniform_profiles(3, p=0.5, q=0.2))


def test_exact_budget():
    world = WorldConfig(n=4, k=2, delta=1.0)
    profiles = uniform_profiles(4, p=0.5, q=0.2)
    with pytest.raises(EnumerationBudgetExceeded):
        exact_expected_payoffs(world, profiles, state_budget=100)
    # n = 5 needs 2^25 states, past the default ceiling
    with pytest.raises(EnumerationBudgetExceeded):
        exact_expected_payoffs(WorldConfig(n=5, k=2, delta=1.0),
                               uniform_profiles(5, p=0.5, q=0.2))
