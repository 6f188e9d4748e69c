import numpy as np

from innosim.bitset import bit, bits_list, popcount
from innosim.config import WorldConfig, uniform_profiles
from innosim.knowledge import (closure_for_firm, knowledge_closure, tarjan_scc)
from innosim.network import parse_replay, sample_learning_network


def brute_closure(net):
    """Least fixed point of: direct arcs hand over the source's discoveries,
    indirect arcs hand over everything the source ends up with."""
    n = net.n
    acc = [0] * n
    for i in range(n):
        for j in net.direct_from[i]:
            acc[i] |= net.discovered[j]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in net.indirect_from[i]:
                add = acc[j] & ~acc[i]
                if add:
                    acc[i] |= add
                    changed = True
    return [acc[i] & ~net.own_mask(i) for i in range(n)]


def brute_coreach(net, i):
    """Firms with a transitive indirect path to i, plus i itself."""
    rev = [[] for _ in range(net.n)]
    for a in range(net.n):
        for b in net.indirect_from[a]:
            rev[b].append(a)
    seen = {i}
    stack = [i]
    while stack:
        v = stack.pop()
        for w in rev[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    mask = 0
    for v in seen:
        mask |= bit(v)
    return mask


def _random_nets(count, seed, n_max=12, delta_choices=(0.0, 0.4, 1.0)):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(3, n_max + 1))
        delta = float(rng.choice(delta_choices))
        world = WorldConfig(n=n, k=2, delta=delta)
        profiles = uniform_profiles(n, p=float(rng.uniform(0.2, 0.9)),
                                    q=float(rng.uniform(0.1, 0.7)))
        yield sample_learning_network(world, profiles, rng)


def test_closure_matches_brute_force():
    for net in _random_nets(200, seed=17):
        ks = knowledge_closure(net)
        assert ks.learned == brute_closure(net)


def test_closure_for_firm_agrees():
    for net in _random_nets(60, seed=19):
        ks = knowledge_closure(net)
        for i in range(net.n):
            assert closure_for_firm(net, i) == ks.learned[i]


def test_coreach_matches_brute_force():
    for net in _random_nets(80, seed=23):
        ks = knowledge_closure(net)
        for i in range(net.n):
            assert ks.coreach_incl(i) == brute_coreach(net, i)


def test_knowers_is_inverse_of_learned():
    for net in _random_nets(40, seed=29):
        ks = knowledge_closure(net)
        for idea in range(net.total_ideas):
            mask = ks.knowers(idea)
            for j in range(net.n):
                assert bool(mask & bit(j)) == bool(ks.learned[j] & bit(idea))


def test_delta_one_equals_direct_graph_reachability():
    # with every arc relaying, a firm learns the discoveries of everyone
    # reachable in the direct graph
    for net in _random_nets(60, seed=31, delta_choices=(1.0,)):
        ks = knowledge_closure(net)
        for i in range(net.n):
            seen = set()
            stack = list(net.direct_from[i])
            while stack:
                v = stack.pop()
                if v in seen:
                    continue
                seen.add(v)
                stack.extend(net.direct_from[v])
            expect = 0
            for v in seen:
                expect |= net.discovered[v]
            assert ks.learned[i] == expect & ~net.own_mask(i)


def test_worked_example_closures(fig1_text, fig2_text):
    ks1 = knowledge_closure(parse_replay(fig1_text))
    # ideas are firm-indexed: firm i's idea is bit i
    assert bits_list(ks1.learned[0]) == [2]
    assert bits_list(ks1.learned[1]) == []
    assert bits_list(ks1.learned[2]) == [0, 3]
    assert bits_list(ks1.learned[3]) == []

    ks2 = knowledge_closure(parse_replay(fig2_text))
    # the extra relay hands firm 0 everything firm 2 knows
    assert bits_list(ks2.learned[0]) == [2, 3]
    assert bits_list(ks2.learned[2]) == [0, 3]


def test_tarjan_components():
    # 0 <-> 1 cycle, 2 feeds into it, 3 isolated
    adj = [[1], [0], [0], []]
    comp_id, comps = tarjan_scc(4, adj)
    assert comp_id[0] == comp_id[1]
    assert comp_id[2] != comp_id[0]
    assert len(comps) == 3
    # children-first: every edge points to an earlier-emitted component
    for v in range(4):
        for w in adj[v]:
            if comp_id[v] != comp_id[w]:
                assert comp_id[w] < comp_id[v]


def test_tarjan_random_cycles():
    rng = np.random.default_rng(37)
    for _ in range(50):
        n = int(rng.integers(2, 10))
        adj = [[int(w) for w in rng.choice(n, size=rng.integers(0, n),
                                           replace=False) if int(w) != v]
               for v in range(n)]
        comp_id, comps = tarjan_scc(n, adj)
        # partition check
        assert sorted(v for c in comps for v in c) == list(range(n))
        for v in range(n):
            assert v in comps[comp_id[v]]
        # mutual reachability within a component
        def reach(a):
            seen = set()
            stack = [a]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            return seen
        for c in comps:
            if len(c) > 1:
                for v in c:
                    r = reach(v)
                    assert all(w in r for w in c if w != v)


def test_coreach_includes_self_and_popcount(fig2_text):
    ks = knowledge_closure(parse_replay(fig2_text))
    # firm 2 is relayed by firm 0 (indirect 0 <- 2), which nobody relays
    mask = ks.coreach_incl(2)
    assert mask & bit(2)
    assert popcount(mask) == 2
