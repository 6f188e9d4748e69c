import math

import numpy as np
import pytest

from innosim.analytics import (borel_mass, borel_total_progeny_pmf, budget_phase,
                               classify_lambda, criticality_report,
                               direct_eq_rate, gen_binom, giant_prediction,
                               giant_share, investment_foc_residual,
                               multitype_extinction, optimal_patent_share,
                               patent_profit_curve, solve_investment,
                               spectral_radius, supercritical_payoff)
from innosim.config import CostSpec, FirmProfile, WorldConfig, uniform_profiles


def test_classify_lambda_band_edges():
    assert classify_lambda(0.89) == "subcritical"
    assert classify_lambda(0.9) == "critical-band"
    assert classify_lambda(1.0) == "critical-band"
    assert classify_lambda(1.1) == "critical-band"
    assert classify_lambda(1.11) == "supercritical"
    assert classify_lambda(1.0, band=(0.99, 1.01)) == "critical-band"


def test_spectral_radius_symmetric_closed_form():
    for n in (2, 10, 500):
        world = WorldConfig(n=n, k=3, delta=0.7)
        lam = spectral_radius(world, uniform_profiles(n, p=0.5, q=0.2))
        assert lam == pytest.approx(0.7 * 0.2 * 0.2 * (n - 1), abs=1e-9)


def test_spectral_radius_two_firm():
    world = WorldConfig(n=2, k=2, delta=1.0)
    profiles = [FirmProfile(p=0.5, q=0.3), FirmProfile(p=0.5, q=0.6)]
    assert spectral_radius(world, profiles) == pytest.approx(0.18, abs=1e-10)


def test_spectral_radius_zero():
    world = WorldConfig(n=5, k=2, delta=1.0)
    assert spectral_radius(world, uniform_profiles(5, p=0.5, q=0.0)) == 0.0


def test_criticality_report():
    n = 41
    world = WorldConfig(n=n, k=3, delta=1.0)
    rep = criticality_report(world, uniform_profiles(n, p=0.5, q=0.16))
    expect = 0.16 * 0.16 * (n - 1)
    assert rep.criticality_index == pytest.approx(expect, abs=1e-9)
    assert rep.classification == classify_lambda(expect)
    assert rep.row_sums.shape == (n,)
    assert np.allclose(rep.row_sums, expect)


def test_giant_share():
    assert giant_share(0.5) == 0.0
    assert giant_share(1.0) == 0.0
    assert giant_share(1.01) > 0.015
    assert giant_share(2.0) == pytest.approx(0.7968121300, abs=1e-9)
    for c in (1.2, 1.5, 3.0):
        a = giant_share(c)
        assert abs(1.0 - math.exp(-c * a) - a) < 1e-9


def test_giant_prediction():
    pred = giant_prediction(2.0, 0.9, 1000)
    assert pred.alpha == pytest.approx(giant_share(2.0))
    assert pred.ideas_learned == pytest.approx(0.9 * pred.alpha * 1000)


def test_borel_pmf():
    for c in (0.5, 1.5):
        assert borel_total_progeny_pmf(c, 0) == 0.0
        assert borel_total_progeny_pmf(c, 1) == pytest.approx(math.exp(-c), rel=1e-12)
        assert borel_total_progeny_pmf(c, 2) == pytest.approx(c * math.exp(-2 * c),
                                                              rel=1e-12)


def test_borel_mass_is_extinction_probability():
    assert borel_mass(0.5) == pytest.approx(1.0, abs=1e-9)
    # above the critical mean, the missing mass is the giant share
    assert borel_mass(1.5) == pytest.approx(1.0 - giant_share(1.5), abs=1e-6)
    assert borel_mass(2.0) == pytest.approx(1.0 - giant_share(2.0), abs=1e-6)


def test_multitype_extinction():
    sub = multitype_extinction(np.array([[0.5]]))
    assert sub[0] == pytest.approx(1.0, abs=1e-9)
    sup = multitype_extinction(np.array([[2.0]]))
    assert sup[0] == pytest.approx(1.0 - giant_share(2.0), abs=1e-6)
    # symmetric two-type process reduces to the scalar fixed point
    pair = multitype_extinction(np.array([[0.0, 2.0], [2.0, 0.0]]))
    assert pair[0] == pytest.approx(pair[1], abs=1e-12)
    assert pair[0] == pytest.approx(1.0 - giant_share(2.0), abs=1e-6)


def test_gen_binom():
    assert gen_binom(5.0, 2) == pytest.approx(10.0, rel=1e-12)
    assert gen_binom(1.5, 2) == 0.0
    assert gen_binom(6.5, 3) == pytest.approx(6.5 * 5.5 * 4.5 / 6.0, rel=1e-12)


def test_supercritical_payoff():
    world = WorldConfig(n=100, k=3, delta=1.0)
    res = supercritical_payoff(world, p=0.9, q=0.1, alpha=0.5)
    survive = (1.0 - 0.01) ** 99
    expect = 0.9 ** 3 * 0.5 * gen_binom(50.0, 2) * survive
    assert not res.degenerate
    assert res.gross == pytest.approx(expect, rel=1e-9)
    assert res.net == pytest.approx(expect - world.cost.value(0.9), rel=1e-9)
    # no giant, nothing to recombine with
    dead = supercritical_payoff(world, p=0.9, q=0.1, alpha=0.0)
    assert dead.degenerate
    assert dead.gross == 0.0
    assert dead.net == pytest.approx(-world.cost.value(0.9))


def test_direct_eq_rate():
    assert direct_eq_rate(101, 2) == pytest.approx(0.1, rel=1e-12)
    assert direct_eq_rate(1001, 3) == pytest.approx(0.002 ** (1.0 / 3.0), rel=1e-12)


def test_patent_profit_curve_values():
    assert patent_profit_curve(0.0, 2) == pytest.approx(0.125)
    assert patent_profit_curve(1.0 / 3.0, 2) == pytest.approx(1.0 / 6.0)
    assert patent_profit_curve(1.0, 2) == 0.0


def test_optimal_patent_share():
    assert optimal_patent_share(2) == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert optimal_patent_share(3) == pytest.approx(1.0 / 9.0, abs=1e-6)
    assert optimal_patent_share(4) == pytest.approx(0.0, abs=1e-6)
    assert optimal_patent_share(10) == pytest.approx(0.0, abs=1e-6)


def test_budget_phase():
    assert budget_phase(0.3, 1.0) == "subcritical"
    assert budget_phase(0.7, 1.0) == "supercritical"
    assert budget_phase(0.5, 1.0) == "critical"
    assert budget_phase(0.25, 0.5) == "critical"
    assert budget_phase(0.2, 0.5) == "subcritical"


def test_solve_investment_interior():
    sol = solve_investment(2, 8.0, CostSpec())
    assert not sol.corner
    assert sol.p == pytest.approx((15.0 - math.sqrt(33.0)) / 16.0, abs=1e-9)
    assert abs(sol.residual) < 1e-9


def test_solve_investment_corner_and_recovery():
    # marginal cost dominates k*p^(k-1) payoffs everywhere at low stakes
    corner = solve_investment(3, 5.0, CostSpec())
    assert corner.corner
    assert corner.p == 0.0
    rich = solve_investment(3, 15.0, CostSpec())
    assert not rich.corner
    assert 0.0 < rich.p < 1.0
    assert abs(investment_foc_residual(rich.p, 3, 15.0, CostSpec())) < 1e-9
    assert solve_investment(2, 0.0, CostSpec()).corner
