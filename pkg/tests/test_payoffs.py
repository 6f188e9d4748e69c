import math

import pytest

from innosim.config import (CostSpec, FirmProfile, PayoffSpec, WorldConfig,
                            uniform_profiles)
from innosim.errors import ConfigError
from innosim.knowledge import knowledge_closure
from innosim.network import parse_replay
from innosim.payoffs import payoff_profile


def _score(text, world, profiles=None):
    net = parse_replay(text)
    if profiles is None:
        profiles = uniform_profiles(net.n, p=0.0, q=0.0)
    return payoff_profile(knowledge_closure(net), net, world, profiles)


def test_worked_example_gross_payoffs(fig1_text, fig2_text):
    world = WorldConfig(n=4, k=3, delta=1.0)
    rep1 = _score(fig1_text, world)
    assert [f.gross for f in rep1.firms] == [0.0, 0.0, 1.0, 0.0]
    assert rep1.firms[2].pt_count == 1.0
    rep2 = _score(fig2_text, world)
    assert [f.gross for f in rep2.firms] == [0.0, 0.0, 0.0, 0.0]
    # the lost monopoly shows up as a singly-contested technology
    assert rep2.firms[2].contested_m1 == 1.0


def test_worked_example_csv_row(fig1_text):
    world = WorldConfig(n=4, k=3, delta=1.0)
    csv = _score(fig1_text, world).to_csv()
    lines = csv.splitlines()
    assert lines[0] == "firm,pt_count,contested_m1,contested_m2plus,gross,cost,link_cost,net"
    assert lines[3] == "2,1,0,0,1,0,0,1"
    assert csv.endswith("\n")


def test_contested_split_in_fig2(fig2_text):
    world = WorldConfig(n=4, k=3, delta=1.0)
    rep = _score(fig2_text, world)
    # firm 0 can produce {0,2,3} as well, contested by firm 2 alone
    assert rep.firms[0].pt_count == 0.0
    assert rep.firms[0].contested_m1 == 1.0
    assert rep.firms[0].contested_m2plus == 0.0


def test_link_cost_charged_to_learner(fig1_text):
    world = WorldConfig(n=4, k=3, delta=1.0, link_cost=0.25)
    rep = _score(fig1_text, world)
    # firm 0 holds two in-arcs, firm 2 two, firms 1 and 3 none
    assert [f.link_cost for f in rep.firms] == [0.5, 0.0, 0.5, 0.0]
    assert rep.firms[2].net == pytest.approx(1.0 - 0.5)


def test_investment_cost_scales_with_sigma(fig1_text):
    world = WorldConfig(n=4, k=3, delta=1.0)
    c = CostSpec().value(0.5)
    rep = _score(fig1_text, world, uniform_profiles(4, p=0.5, q=0.0))
    assert rep.firms[0].cost == pytest.approx(c)
    # a merged firm pays the cost once per idea slot
    profiles = [FirmProfile(p=0.5, q=0.0, sigma=2)] + \
        [FirmProfile(p=0.5, q=0.0) for _ in range(3)]
    rep2 = _score(fig1_text, world, profiles)
    assert rep2.firms[0].cost == pytest.approx(2 * c)
    assert rep2.firms[1].cost == pytest.approx(c)


# ---------------------------------------------------------------------------
# Variants
# ---------------------------------------------------------------------------

# Firm 0 discovers idea 0 and learns ideas 3 and 4; firms 1 and 2 learn the
# anchor and the whole pool, so the k=3 technology {0,3,4} has two rival
# producers.
TWO_RIVALS = """\
FIRMS 5
DISCOVERED
0
3
4
DIRECT
0 3
0 4
1 0
1 3
1 4
2 0
2 3
2 4
INDIRECT
"""


def test_competition_payoffs_shared_production():
    world = WorldConfig(n=5, k=3, delta=1.0,
                        payoff=PayoffSpec(variant="competition",
                                          f_table=(0.5,)))
    rep = _score(TWO_RIVALS, world)
    f0 = rep.firms[0]
    assert f0.pt_count == 0.0
    assert f0.contested_m2plus == 1.0
    # the table has one entry, so f(2) falls back to f(1) = 0.5
    assert f0.gross == pytest.approx(0.5)


def test_competition_distinguishes_m_with_longer_table():
    world = WorldConfig(n=5, k=3, delta=1.0,
                        payoff=PayoffSpec(variant="competition",
                                          f_table=(0.9, 0.7, 0.5, 0.2)))
    rep = _score(TWO_RIVALS, world)
    assert rep.firms[0].gross == pytest.approx(0.7)


def test_competition_negative_f(fig2_text):
    world = WorldConfig(n=4, k=3, delta=1.0,
                        payoff=PayoffSpec(variant="competition",
                                          f_table=(-0.5,)))
    rep = _score(fig2_text, world)
    # firm 2's only technology is contested once: it now costs money
    assert rep.firms[2].gross == pytest.approx(-0.5)
    baseline = _score(fig2_text, WorldConfig(n=4, k=3, delta=1.0))
    assert baseline.firms[2].gross == 0.0


def test_rho_payoff_is_concave_count():
    # firm 0 learns three ideas and nobody else learns the anchor
    text = """\
FIRMS 4
DISCOVERED
0
1
2
3
DIRECT
0 1
0 2
0 3
INDIRECT
"""
    world = WorldConfig(n=4, k=2, delta=1.0,
                        payoff=PayoffSpec(variant="rho", rho=0.5))
    rep = _score(text, world)
    # |PT| = 3 pairs through the anchor
    assert rep.firms[0].pt_count == 3.0
    assert rep.firms[0].gross == pytest.approx(math.sqrt(3.0))
    assert rep.firms[1].gross == 0.0


PATENT_WORLD = """\
FIRMS 3
DISCOVERED
0
1
DIRECT
0 1
1 0
2 0
2 1
INDIRECT
"""


def test_patent_payoffs():
    world = WorldConfig(n=3, k=2, delta=1.0,
                        payoff=PayoffSpec(variant="patents", patent_share=0.3))
    profiles = [FirmProfile(p=0.0, q=0.0, patented=True),
                FirmProfile(p=0.0, q=0.0),
                FirmProfile(p=0.0, q=0.0)]
    rep = _score(PATENT_WORLD, world, profiles)
    # the holder keeps its technology despite firm 2 knowing everything
    assert rep.firms[0].pt_count == 1.0
    assert rep.firms[0].gross == 1.0
    # firm 1 cannot build on the patented idea: its pool is empty
    assert rep.firms[1].pt_count == 0.0
    assert rep.firms[2].pt_count == 0.0


def test_public_payoffs():
    text = """\
FIRMS 3
DISCOVERED
0
1
2
DIRECT
0 1
2 0
2 1
INDIRECT
"""
    world = WorldConfig(n=3, k=2, delta=1.0,
                        payoff=PayoffSpec(variant="public"))
    profiles = [FirmProfile(p=0.0, q=0.0),
                FirmProfile(p=0.0, q=0.0),
                FirmProfile(p=0.0, q=0.0, public=True)]
    rep = _score(text, world, profiles)
    # the public lab killed firm 0's monopoly on {0, 1}
    assert rep.firms[0].pt_count == 0.0
    assert rep.firms[0].contested_m1 == 1.0
    # and is itself paid for everything it can produce
    assert rep.firms[2].pt_count == 2.0
    assert rep.firms[2].gross == 2.0


def test_phi_payoffs():
    text = """\
FIRMS 3
DISCOVERED
0
1
DIRECT
0 1
INDIRECT
0 1
"""
    world = WorldConfig(n=3, k=2, delta=1.0,
                        payoff=PayoffSpec(variant="phi",
                                          phi_table=(0.0, 1.0, 2.5)))
    rep = _score(text, world)
    # firm 0 discovered, learned one idea, and nobody learns from it
    assert rep.firms[0].gross == pytest.approx(1.0)
    # firm 1 discovered but firm 0 copies it: whole position voided
    assert rep.firms[1].gross == 0.0
    # firm 2 never discovered
    assert rep.firms[2].gross == 0.0


def test_phi_rejects_multi_idea_firms():
    world = WorldConfig(n=3, k=2, delta=1.0,
                        payoff=PayoffSpec(variant="phi",
                                          phi_table=(0.0, 1.0)))
    net = parse_replay("FIRMS 3\nDISCOVERED\n0\nDIRECT\nINDIRECT\n")
    profiles = uniform_profiles(3, p=0.0, q=0.0, sigma=2)
    with pytest.raises(ConfigError, match="single-idea"):
        payoff_profile(knowledge_closure(net), net, world, profiles)


def test_profile_count_mismatch(fig1_text):
    world = WorldConfig(n=4, k=3, delta=1.0)
    net = parse_replay(fig1_text)
    with pytest.raises(ConfigError):
        payoff_profile(knowledge_closure(net), net, world,
                       uniform_profiles(3, p=0.0, q=0.0))
