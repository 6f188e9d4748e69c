"""Realization-level payoffs.

Given a realized network and its knowledge closure, score every firm: count
proprietary technologies, apply the payoff variant, subtract investment and
link costs.  All expectation-taking lives elsewhere; this module is
deterministic given the realization (up to the sampling fallback for huge
instances, which takes an explicit rng).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bitset import bit, bits_list, is_subset, iter_bits, popcount
from .config import FirmProfile, WorldConfig
from .counting import (COMPETITOR_CAP, EXACT_BUDGET, SAMPLE_DEFAULT,
                       anchor_pools, check_state, comb, count_uncovered_ie)
from .errors import ConfigError
from .knowledge import KnowledgeState
from .network import RealizedNetwork


@dataclass(frozen=True)
class FirmPayoff:
    firm: int
    pt_count: float
    contested_m1: float
    contested_m2plus: float
    gross: float
    cost: float
    link_cost: float
    net: float
    pt_se: float = 0.0
    estimated: bool = False


@dataclass
class PayoffReport:
    firms: list[FirmPayoff]

    CSV_HEADER = "firm,pt_count,contested_m1,contested_m2plus,gross,cost,link_cost,net"

    @property
    def n(self) -> int:
        return len(self.firms)

    def mean_net(self) -> float:
        return float(np.mean([f.net for f in self.firms]))

    def total_pt(self) -> float:
        return float(np.sum([f.pt_count for f in self.firms]))

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for f in self.firms:
            row = (f.firm, f.pt_count, f.contested_m1, f.contested_m2plus,
                   f.gross, f.cost, f.link_cost, f.net)
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float) and v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:.10g}"


# Per-anchor counting result; spills the multiplicity split the report needs.
@dataclass
class _AnchorCount:
    n0: float = 0.0
    m1: float = 0.0
    m2plus: float = 0.0
    by_m: Optional[dict[int, float]] = None
    se: float = 0.0
    estimated: bool = False


def _maximal(masks: Sequence[int]) -> list[int]:
    keep: list[int] = []
    for c in sorted(set(masks), reverse=True):
        if not any(is_subset(c, other) for other in keep):
            keep.append(c)
    return keep


def _count_anchor(pool: int, rival_masks: Counter, k1: int, need_by_m: bool,
                  rng, budget: int, cap: int, samples: int) -> _AnchorCount:
    out = _AnchorCount()
    candidates = comb(popcount(pool), k1)
    if candidates == 0:
        return out
    masks = {m: c for m, c in rival_masks.items() if popcount(m) >= k1}
    if not masks:
        out.n0 = float(candidates)
        return out

    distinct = sorted(masks, reverse=True)
    if not need_by_m and len(distinct) <= cap:
        # inclusion-exclusion, exact
        out.n0 = float(count_uncovered_ie(pool, _maximal(distinct), k1, cap))
        n1 = 0
        for r, cnt in masks.items():
            if cnt != 1:
                continue
            others = _maximal([o & r for o in distinct if o != r])
            n1 += count_uncovered_ie(r, others, k1, cap)
        out.m1 = float(n1)
        out.m2plus = float(candidates) - out.n0 - out.m1
        return out

    if candidates <= budget:
        by_m: dict[int, float] = {}
        for combo in _subsets(pool, k1):
            m = sum(cnt for r, cnt in masks.items() if is_subset(combo, r))
            by_m[m] = by_m.get(m, 0.0) + 1.0
        out.n0 = by_m.get(0, 0.0)
        out.m1 = by_m.get(1, 0.0)
        out.m2plus = float(candidates) - out.n0 - out.m1
        out.by_m = by_m
        return out

    # sampling fallback; unbiased, with a standard error on the monopoly count
    members = bits_list(pool)
    by_m = {}
    hits0 = 0
    for _ in range(samples):
        pick = rng.choice(len(members), size=k1, replace=False)
        s = 0
        for idx in pick:
            s |= bit(members[int(idx)])
        m = sum(cnt for r, cnt in masks.items() if is_subset(s, r))
        by_m[m] = by_m.get(m, 0.0) + 1.0
        if m == 0:
            hits0 += 1
    scale = candidates / samples
    out.by_m = {m: c * scale for m, c in by_m.items()}
    out.n0 = out.by_m.get(0, 0.0)
    out.m1 = out.by_m.get(1, 0.0)
    out.m2plus = float(candidates) - out.n0 - out.m1
    frac = hits0 / samples
    out.se = math.sqrt(max(frac * (1 - frac), 0.0) / samples) * candidates
    out.estimated = True
    return out


def _subsets(pool: int, size: int):
    from itertools import combinations
    members = bits_list(pool)
    for combo in combinations(members, size):
        s = 0
        for b in combo:
            s |= bit(b)
        yield s


def _out_degree(net: RealizedNetwork) -> list[int]:
    deg = [0] * net.n
    for i in range(net.n):
        for j in net.direct_from[i]:
            deg[j] += 1
    return deg


def payoff_profile(kstate: KnowledgeState, net: RealizedNetwork,
                   world: WorldConfig, profiles: Sequence[FirmProfile],
                   rng: Optional[np.random.Generator] = None,
                   budget: int = EXACT_BUDGET, cap: int = COMPETITOR_CAP,
                   samples: int = SAMPLE_DEFAULT) -> PayoffReport:
    check_state(kstate, net)
    if len(profiles) != net.n:
        raise ConfigError("profile count does not match network size")
    spec = world.payoff
    variant = spec.variant
    k1 = world.k - 1

    if variant == "phi":
        return _phi_payoffs(kstate, net, world, profiles)

    patented_all = 0
    if variant == "patents":
        for j, pr in enumerate(profiles):
            if pr.patented:
                patented_all |= net.own_mask(j)

    need_by_m = variant == "competition" and len(spec.f_table) > 3
    if rng is None:
        rng = np.random.default_rng(0)

    firms = []
    for i, prof in enumerate(profiles):
        immune = (variant == "public" and prof.public) or \
                 (variant == "patents" and prof.patented)
        pt = m1 = m2plus = 0.0
        se2 = 0.0
        est = False
        contested_gross = 0.0
        for anchor, pool in anchor_pools(kstate, net, i):
            if variant == "patents":
                pool &= ~(patented_all & ~net.own_mask(i))
            if immune:
                pt += comb(popcount(pool), k1)
                continue
            rivals = kstate.knowers(anchor) & ~bit(i)
            rival_masks: Counter = Counter()
            for j in iter_bits(rivals):
                rival_masks[kstate.knowledge_mask(net, j) & pool] += 1
            res = _count_anchor(pool, rival_masks, k1, need_by_m, rng,
                                budget, cap, samples)
            pt += res.n0
            m1 += res.m1
            m2plus += res.m2plus
            se2 += res.se ** 2
            est = est or res.estimated
            if variant == "competition":
                if res.by_m is not None:
                    contested_gross += sum(spec.f(m) * cnt
                                           for m, cnt in res.by_m.items() if m > 0)
                else:
                    # f constant beyond the table: the m1/m2plus split is enough
                    contested_gross += spec.f(1) * res.m1 + spec.f(2) * res.m2plus

        if variant == "competition":
            gross = pt + contested_gross
        elif variant == "rho":
            gross = pt ** spec.rho if pt > 0 else 0.0
        else:
            gross = pt

        # investment cost is per idea slot, so a merged firm pays per member
        cost = 0.0 if prof.budget_mode else prof.sigma * world.cost.value(prof.p)
        link = world.link_cost * len(net.direct_from[i])
        firms.append(FirmPayoff(
            firm=i, pt_count=pt, contested_m1=m1, contested_m2plus=m2plus,
            gross=gross, cost=cost, link_cost=link, net=gross - cost - link,
            pt_se=math.sqrt(se2), estimated=est))
    return PayoffReport(firms)


def _phi_payoffs(kstate: KnowledgeState, net: RealizedNetwork,
                 world: WorldConfig, profiles: Sequence[FirmProfile]) -> PayoffReport:
    """Reward phi(|learned set|) when the own idea lands and nobody copies it.

    Defined for full indirect transmission, where one outgoing arc hands over
    everything; a learner therefore voids the whole position.
    """
    if any(pr.sigma != 1 for pr in profiles):
        raise ConfigError("phi payoffs are defined for single-idea firms")
    out_deg = _out_degree(net)
    firms = []
    k1 = world.k - 1
    for i, prof in enumerate(profiles):
        discovered = net.discovered[i] != 0
        alone = out_deg[i] == 0
        learned = popcount(kstate.learned[i])
        pt = float(comb(learned, k1)) if discovered and alone else 0.0
        gross = world.payoff.phi(learned) if discovered and alone else 0.0
        contested = float(comb(learned, k1)) - pt if discovered else 0.0
        cost = world.cost.value(prof.p)
        link = world.link_cost * len(net.direct_from[i])
        firms.append(FirmPayoff(
            firm=i, pt_count=pt, contested_m1=0.0, contested_m2plus=contested,
            gross=gross, cost=cost, link_cost=link, net=gross - cost - link))
    return PayoffReport(firms)
