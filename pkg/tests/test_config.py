import math

import pytest

from innosim.config import (CostSpec, FirmProfile, PayoffSpec, WorldConfig,
                            budget_profile, register_cost_family,
                            uniform_profiles, validate_profiles, with_q)
from innosim.errors import ConfigError


# ---------------------------------------------------------------------------
# Cost
# ---------------------------------------------------------------------------


def test_barrier_cost_values():
    c = CostSpec()
    assert c.value(0.0) == 0.0
    # c(p) = 1/(1-p) - 1 - p
    assert c.value(0.5) == pytest.approx(0.5)
    assert c.derivative(0.0) == pytest.approx(0.0)
    assert c.derivative(0.5) == pytest.approx(3.0)
    # scales linearly in c0
    c2 = CostSpec(c0=2.0)
    assert c2.value(0.5) == pytest.approx(1.0)


def test_barrier_cost_blows_up():
    c = CostSpec()
    assert c.value(1.0 - 1e-9) > 1e6


def test_cost_convexity_spot():
    c = CostSpec()
    grid = [i / 50 for i in range(1, 49)]
    diffs = [c.value(b) - c.value(a) for a, b in zip(grid, grid[1:])]
    assert all(d2 >= d1 for d1, d2 in zip(diffs, diffs[1:]))


def test_cost_validation():
    with pytest.raises(ConfigError):
        CostSpec(family="nope")
    with pytest.raises(ConfigError):
        CostSpec(c0=-1.0)
    with pytest.raises(ConfigError):
        CostSpec(c0=math.inf)


def test_bad_family_rejected_on_first_use():
    register_cost_family("offset", lambda p, c0: c0 * (p + 1.0),
                         lambda p, c0: c0)
    with pytest.raises(ConfigError, match="c\\(0\\)"):
        CostSpec(family="offset")


# ---------------------------------------------------------------------------
# Payoff variants
# ---------------------------------------------------------------------------


def test_payoff_variant_validation():
    with pytest.raises(ConfigError):
        PayoffSpec(variant="bonus")
    with pytest.raises(ConfigError):
        PayoffSpec(variant="rho", rho=0.0)
    with pytest.raises(ConfigError):
        PayoffSpec(variant="phi", phi_table=(0.0,))
    with pytest.raises(ConfigError):
        PayoffSpec(variant="phi", phi_table=(0.0, 1.0, 1.0))
    with pytest.raises(ConfigError):
        PayoffSpec(variant="competition")
    # f(1) may not exceed f(0) = 1
    with pytest.raises(ConfigError):
        PayoffSpec(variant="competition", f_table=(1.2,))
    with pytest.raises(ConfigError):
        PayoffSpec(variant="competition", f_table=(0.8, 0.9))
    with pytest.raises(ConfigError):
        PayoffSpec(variant="patents", patent_share=1.5)


def test_f_lookup_pads_with_last_entry():
    spec = PayoffSpec(variant="competition", f_table=(0.8, 0.3))
    assert spec.f(0) == 1.0
    assert spec.f(1) == 0.8
    assert spec.f(2) == 0.3
    assert spec.f(9) == 0.3
    neg = PayoffSpec(variant="competition", f_table=(-0.5,))
    assert neg.f(1) == -0.5
    assert neg.f(4) == -0.5


def test_phi_lookup_extends_linearly():
    spec = PayoffSpec(variant="phi", phi_table=(0.0, 1.0, 2.5))
    assert spec.phi(0) == 0.0
    assert spec.phi(2) == 2.5
    # past the table: last value plus the final increment per step
    assert spec.phi(3) == pytest.approx(4.0)
    assert spec.phi(5) == pytest.approx(7.0)


# ---------------------------------------------------------------------------
# World
# ---------------------------------------------------------------------------


def test_world_validation():
    with pytest.raises(ConfigError):
        WorldConfig(n=1, k=3, delta=0.5)
    with pytest.raises(ConfigError):
        WorldConfig(n=10, k=1, delta=0.5)
    with pytest.raises(ConfigError):
        WorldConfig(n=10, k=3, delta=1.5)
    with pytest.raises(ConfigError):
        WorldConfig(n=10, k=3, delta=0.5, link_cost=-0.1)
    # the learning-volume payoff needs full relaying
    with pytest.raises(ConfigError):
        WorldConfig(n=10, k=3, delta=0.5,
                    payoff=PayoffSpec(variant="phi", phi_table=(0.0, 1.0)))
    WorldConfig(n=10, k=3, delta=1.0,
                payoff=PayoffSpec(variant="phi", phi_table=(0.0, 1.0)))


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


def test_profile_validation():
    with pytest.raises(ConfigError):
        FirmProfile(p=1.0)
    with pytest.raises(ConfigError):
        FirmProfile(p=0.5, q=1.5)
    with pytest.raises(ConfigError):
        FirmProfile(p=0.5, beta=0.0)
    with pytest.raises(ConfigError):
        FirmProfile(p=0.5, sigma=0)
    with pytest.raises(ConfigError):
        FirmProfile(p=0.5, q0=0.5)  # q1 missing
    with pytest.raises(ConfigError):
        FirmProfile(p=0.5, budget_mode=True)
    # p = 1 is reachable on the budget line (zero interaction)
    FirmProfile(p=1.0, q=0.0, budget_mode=True, budget_rate=0.5)


def test_budget_profile_identity():
    world = WorldConfig(n=100, k=3, delta=1.0)
    prof = budget_profile(world, q=0.004, budget_rate=0.5)
    assert prof.budget_mode
    assert prof.p + 0.5 * prof.q * 100 == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        budget_profile(world, q=0.5, budget_rate=0.5)


def test_validate_profiles_cross_checks():
    world = WorldConfig(n=3, k=2, delta=1.0)
    profs = uniform_profiles(3, p=0.5, q=0.2)
    validate_profiles(world, profs)
    with pytest.raises(ConfigError):
        validate_profiles(world, profs[:2])
    mixed = [profs[0], profs[1],
             FirmProfile(p=0.5, q=0.2, budget_mode=True, budget_rate=0.1)]
    with pytest.raises(ConfigError):
        validate_profiles(world, mixed)
    with pytest.raises(ConfigError):
        validate_profiles(world, uniform_profiles(3, p=0.5, q=0.2, public=True))
    with pytest.raises(ConfigError):
        validate_profiles(world, uniform_profiles(3, p=0.5, q=0.2, patented=True))


def test_with_q():
    prof = FirmProfile(p=0.5, q=0.2, beta=0.7)
    out = with_q(prof, 0.4)
    assert out.q == 0.4
    assert out.p == 0.5 and out.beta == 0.7
