from itertools import combinations

import numpy as np
import pytest

from innosim.bitset import bits_list, is_subset, mask_from
from innosim.config import WorldConfig, uniform_profiles
from innosim.counting import (COMPETITOR_CAP, anchor_pools,
                              count_proprietary_exact, count_proprietary_ie,
                              count_uncovered_ie, competitor_covers,
                              enumerate_proprietary, multiplicity_exact,
                              multiplicity_ie, weighted_subset_count)
from innosim.errors import CompetitorCapExceeded, EnumerationBudgetExceeded
from innosim.knowledge import knowledge_closure
from innosim.network import parse_replay, sample_learning_network


def test_worked_example_counts(fig1_text, fig2_text):
    world = WorldConfig(n=4, k=3, delta=1.0)
    net1 = parse_replay(fig1_text)
    ks1 = knowledge_closure(net1)
    assert count_proprietary_exact(ks1, net1, world, 2) == {2: 1}
    assert enumerate_proprietary(ks1, net1, world, 2) == [(0, 2, 3)]
    assert count_proprietary_exact(ks1, net1, world, 0) == {0: 0}
    assert count_proprietary_exact(ks1, net1, world, 1) == {}
    assert count_proprietary_exact(ks1, net1, world, 3) == {3: 0}

    net2 = parse_replay(fig2_text)
    ks2 = knowledge_closure(net2)
    # firm 0 now knows {0, 2, 3} too, so the technology is contested
    assert count_proprietary_exact(ks2, net2, world, 2) == {2: 0}
    assert enumerate_proprietary(ks2, net2, world, 2) == []


def test_lowest_anchor_attribution():
    # a two-idea firm counts each technology once, at its lowest own idea
    from innosim.network import RealizedNetwork
    net = RealizedNetwork(n=2, sigma=(2, 1), discovered=[0b011, 0b100],
                          direct_from=[[1], []], indirect_from=[[], []])
    world = WorldConfig(n=2, k=2, delta=1.0)
    ks = knowledge_closure(net)
    assert ks.learned[0] == 0b100
    pools = dict(anchor_pools(ks, net, 0))
    # anchor 0 pairs with idea 1 (own, higher) and idea 2 (learned);
    # anchor 1 pairs with idea 2 only
    assert bits_list(pools[0]) == [1, 2]
    assert bits_list(pools[1]) == [2]
    techs = enumerate_proprietary(ks, net, world, 0)
    assert techs == [(0, 1), (0, 2), (1, 2)]


def test_competitor_covers_dedup_and_dominance(fig2_text):
    net = parse_replay(fig2_text)
    ks = knowledge_closure(net)
    # for firm 2's anchor, firm 0 knows the whole pool
    (anchor, pool), = anchor_pools(ks, net, 2)
    covers = competitor_covers(ks, net, 2, anchor, pool)
    assert covers == [pool]


def _random_cover_instances(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        width = int(rng.integers(3, 9))
        pool = mask_from(rng.choice(12, size=width, replace=False))
        ncov = int(rng.integers(0, 7))
        covers = []
        for _ in range(ncov):
            keep = rng.random(12) < 0.5
            covers.append(pool & mask_from(np.flatnonzero(keep)))
        k1 = int(rng.integers(1, 4))
        yield pool, covers, k1


def brute_multiplicity(pool, covers, k1):
    out = {}
    for combo in combinations(bits_list(pool), k1):
        s = mask_from(combo)
        m = sum(1 for c in covers if is_subset(s, c))
        out[m] = out.get(m, 0) + 1
    return out


def test_multiplicity_exact_vs_brute():
    for pool, covers, k1 in _random_cover_instances(150, seed=41):
        got = multiplicity_exact(pool, covers, k1)
        assert got == brute_multiplicity(pool, covers, k1)


def test_multiplicity_ie_vs_exact():
    # ie multiplicities are over deduplicated covers, so feed it distinct sets
    for pool, covers, k1 in _random_cover_instances(150, seed=43):
        distinct = sorted(set(covers), reverse=True)
        exact = multiplicity_exact(pool, distinct, k1)
        ie = multiplicity_ie(pool, distinct, k1)
        exact = {m: c for m, c in exact.items() if c}
        assert ie == exact


def test_count_uncovered_ie_vs_brute():
    for pool, covers, k1 in _random_cover_instances(200, seed=47):
        got = count_uncovered_ie(pool, covers, k1)
        assert got == brute_multiplicity(pool, covers, k1).get(0, 0)


def test_budget_and_cap_raise():
    pool = mask_from(range(40))
    with pytest.raises(EnumerationBudgetExceeded):
        multiplicity_exact(pool, [], 10, budget=100)
    covers = [mask_from([i, i + 1]) for i in range(25)]
    with pytest.raises(CompetitorCapExceeded):
        count_uncovered_ie(mask_from(range(30)), covers, 2, cap=COMPETITOR_CAP)


def test_exact_vs_ie_on_random_worlds():
    rng = np.random.default_rng(53)
    done = 0
    while done < 150:
        n = int(rng.integers(4, 22))
        k = int(rng.integers(2, 5))
        world = WorldConfig(n=n, k=k, delta=float(rng.choice([0.0, 0.5, 1.0])))
        profiles = uniform_profiles(n, p=float(rng.uniform(0.3, 0.9)),
                                    q=float(rng.uniform(0.1, 0.5)))
        net = sample_learning_network(world, profiles, rng)
        ks = knowledge_closure(net)
        i = int(rng.integers(0, n))
        try:
            exact = count_proprietary_exact(ks, net, world, i)
            ie = count_proprietary_ie(ks, net, world, i)
        except CompetitorCapExceeded:
            continue
        assert exact == ie
        done += 1


def test_enumerate_matches_count():
    rng = np.random.default_rng(59)
    for _ in range(40):
        n = int(rng.integers(4, 14))
        world = WorldConfig(n=n, k=3, delta=1.0)
        profiles = uniform_profiles(n, p=0.7, q=0.4)
        net = sample_learning_network(world, profiles, rng)
        ks = knowledge_closure(net)
        for i in range(n):
            counts = count_proprietary_exact(ks, net, world, i)
            techs = enumerate_proprietary(ks, net, world, i)
            assert len(techs) == sum(counts.values())
            assert len(set(techs)) == len(techs)
            own = set(bits_list(net.discovered[i]))
            for t in techs:
                assert len(t) == 3
                assert own & set(t)


def test_weighted_subset_count_vs_brute():
    rng = np.random.default_rng(61)
    for _ in range(50):
        counts = [int(rng.integers(0, 4)) for _ in range(3)]
        weights = [float(rng.uniform(0.1, 1.0)) for _ in range(3)]
        size = int(rng.integers(0, 5))
        items = []
        for y, w in zip(counts, weights):
            items += [w] * y
        brute = sum(float(np.prod(c)) for c in combinations(items, size))
        got = weighted_subset_count(counts, weights, size)
        assert got == pytest.approx(brute, abs=1e-12)
