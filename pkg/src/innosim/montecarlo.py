"""Monte Carlo expectation of payoffs over network replications.

Replications are independent tasks keyed by (seed, replication index); each
owns its rng stream and writes into its own result slot, so the aggregate is
bit-identical no matter how many worker threads ran it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .bitset import bit, popcount
from .config import FirmProfile, WorldConfig, validate_profiles
from .errors import ConfigError, EnumerationBudgetExceeded
from .knowledge import knowledge_closure
from .network import (RealizedNetwork, arc_prob_matrix, idea_layout,
                      sample_discoveries, sample_learning_network)
from .payoffs import PayoffReport, payoff_profile


def rep_rng(seed: int, rep: int, key: Sequence[int] = ()) -> np.random.Generator:
    """Stream for one replication; disjoint across (seed, key, rep)."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in key], int(rep)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def simulate_once(world: WorldConfig, profiles: Sequence[FirmProfile],
                  rng: np.random.Generator):
    net = sample_learning_network(world, profiles, rng)
    kstate = knowledge_closure(net)
    report = payoff_profile(kstate, net, world, profiles, rng=rng)
    return net, kstate, report


@dataclass
class PayoffSummary:
    reps: int
    net_mean: np.ndarray
    net_se: np.ndarray
    pt_mean: np.ndarray
    gross_mean: np.ndarray

    @property
    def mean_net(self) -> float:
        return float(np.mean(self.net_mean))

    @property
    def mean_net_se(self) -> float:
        # firm-average per rep varies; its SE is what the solver certificate uses
        return float(np.mean(self.net_se) / np.sqrt(len(self.net_se)))


def expected_payoffs(world: WorldConfig, profiles: Sequence[FirmProfile],
                     reps: int, seed: int, threads: int = 1,
                     key: Sequence[int] = ()) -> PayoffSummary:
    if reps < 1:
        raise ConfigError("reps must be >= 1")
    validate_profiles(world, profiles)
    n = len(profiles)
    nets = np.empty((reps, n), dtype=float)
    pts = np.empty((reps, n), dtype=float)
    gross = np.empty((reps, n), dtype=float)

    def run(rep: int) -> None:
        rng = rep_rng(seed, rep, key)
        _, _, report = simulate_once(world, profiles, rng)
        nets[rep] = [f.net for f in report.firms]
        pts[rep] = [f.pt_count for f in report.firms]
        gross[rep] = [f.gross for f in report.firms]

    if threads <= 1:
        for rep in range(reps):
            run(rep)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(reps)))

    net_mean = np.mean(nets, axis=0)
    if reps > 1:
        net_se = np.std(nets, axis=0, ddof=1) / np.sqrt(reps)
    else:
        net_se = np.zeros(n)
    return PayoffSummary(reps=reps, net_mean=net_mean, net_se=net_se,
                         pt_mean=np.mean(pts, axis=0),
                         gross_mean=np.mean(gross, axis=0))


def per_rep_firm_means(world: WorldConfig, profiles: Sequence[FirmProfile],
                       reps: int, seed: int, key: Sequence[int] = ()) -> np.ndarray:
    """Across-firm average net payoff for each replication."""
    out = np.empty(reps, dtype=float)
    for rep in range(reps):
        rng = rep_rng(seed, rep, key)
        _, _, report = simulate_once(world, profiles, rng)
        out[rep] = report.mean_net()
    return out


# ---------------------------------------------------------------------------
# Brute-force expectation for tiny worlds (test oracle)
# ---------------------------------------------------------------------------


def exact_expected_payoffs(world: WorldConfig, profiles: Sequence[FirmProfile],
                           state_budget: int = 1 << 21) -> np.ndarray:
    """Exact per-firm expected net payoff by enumerating every realization.

    Only defined when indirect transmission is all-or-nothing (delta 0 or 1),
    which keeps each ordered pair binary: arc absent, or arc present with its
    delta flag forced.
    """
    validate_profiles(world, profiles)
    if world.delta not in (0.0, 1.0):
        raise ConfigError("exact enumeration needs delta 0 or 1")
    n = len(profiles)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    probs = arc_prob_matrix(world, profiles)
    sigma = idea_layout(profiles)
    total_ideas = sum(sigma)
    n_states = (1 << len(pairs)) * (1 << total_ideas)
    if n_states > state_budget:
        raise EnumerationBudgetExceeded(f"{n_states} realizations exceed budget")

    offsets = np.concatenate(([0], np.cumsum(sigma)))
    slot_p = np.empty(total_ideas)
    for i, prof in enumerate(profiles):
        slot_p[offsets[i]:offsets[i + 1]] = prof.p

    expected = np.zeros(n)
    indirect_all = world.delta == 1.0
    for arc_bits in range(1 << len(pairs)):
        arc_p = 1.0
        direct_from: list[list[int]] = [[] for _ in range(n)]
        for idx, (i, j) in enumerate(pairs):
            if arc_bits >> idx & 1:
                arc_p *= probs[i, j]
                direct_from[i].append(j)
            else:
                arc_p *= 1.0 - probs[i, j]
        if arc_p == 0.0:
            continue
        indirect_from = [list(s) for s in direct_from] if indirect_all \
            else [[] for _ in range(n)]
        for disc_bits in range(1 << total_ideas):
            w = arc_p
            for s in range(total_ideas):
                w *= slot_p[s] if disc_bits >> s & 1 else 1.0 - slot_p[s]
            if w == 0.0:
                continue
            disc_global = [disc_bits & (((1 << int(sigma[i])) - 1) << int(offsets[i]))
                           for i in range(n)]
            net = RealizedNetwork(n=n, sigma=tuple(sigma),
                                  discovered=disc_global,
                                  direct_from=[list(s) for s in direct_from],
                                  indirect_from=[list(s) for s in indirect_from])
            kstate = knowledge_closure(net)
            report = payoff_profile(kstate, net, world, profiles)
            for i, f in enumerate(report.firms):
                expected[i] += w * f.net
    return expected
