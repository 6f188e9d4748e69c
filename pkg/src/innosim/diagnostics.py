"""Realization diagnostics: learning-chain depth and component structure.

tau(t) measures how many of a firm's direct arcs are needed to assemble a
technology's outside ideas.  Near the critical threshold almost every
proprietary technology should be within one arc of its owner; the solver
reports the sample mean as a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .bitset import bit, bits_list, iter_bits, popcount
from .config import WorldConfig
from .counting import EXACT_BUDGET, anchor_pools, comb, competitor_covers
from .errors import IntegrityError
from .knowledge import KnowledgeState
from .network import RealizedNetwork


@dataclass
class TauStats:
    values: list[int]
    empty: bool

    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values else float("nan")


def arc_contributions(kstate: KnowledgeState, net: RealizedNetwork, i: int) -> list[int]:
    """Idea set each of firm i's direct arcs delivers.

    A plain arc carries the source's own discovered ideas; an indirect arc
    carries the source's full knowledge.
    """
    indirect = set(net.indirect_from[i])
    out = []
    for j in net.direct_from[i]:
        mask = net.discovered[j]
        if j in indirect:
            mask |= kstate.learned[j] | net.discovered[j]
        out.append(mask)
    return out


def min_cover_size(needed: int, contributions: list[int]) -> Optional[int]:
    """Smallest number of contribution sets covering `needed`, or None."""
    if needed == 0:
        return 0
    useful = sorted({c & needed for c in contributions if c & needed}, reverse=True)
    limit = popcount(needed)
    for size in range(1, min(len(useful), limit) + 1):
        for pick in combinations(useful, size):
            acc = 0
            for c in pick:
                acc |= c
            if acc & needed == needed:
                return size
    return None


def tau_of(kstate: KnowledgeState, net: RealizedNetwork, i: int, t_mask: int) -> int:
    needed = t_mask & ~net.own_mask(i)
    size = min_cover_size(needed, arc_contributions(kstate, net, i))
    if size is None:
        raise IntegrityError("technology not coverable by the firm's arcs")
    return size


def tau_statistics(kstate: KnowledgeState, net: RealizedNetwork, i: int,
                   world: WorldConfig, sample_size: int = 200,
                   rng: Optional[np.random.Generator] = None) -> TauStats:
    """tau over a uniform sample of firm i's proprietary technologies."""
    if rng is None:
        rng = np.random.default_rng(0)
    k1 = world.k - 1
    pools = []
    for anchor, pool in anchor_pools(kstate, net, i):
        covers = [c for c in competitor_covers(kstate, net, i, anchor, pool)
                  if popcount(c) >= k1]
        pools.append((anchor, pool, covers, comb(popcount(pool), k1)))
    total = sum(c for _, _, _, c in pools)
    if total == 0:
        return TauStats([], empty=True)

    values: list[int] = []
    if total <= max(4 * sample_size, 2000):
        # small candidate space: enumerate, then subsample if needed
        found = []
        for anchor, pool, covers, _ in pools:
            for combo in combinations(bits_list(pool), k1):
                s = 0
                for b in combo:
                    s |= bit(b)
                if not any(s & c == s for c in covers):
                    found.append(s | bit(anchor))
        if not found:
            return TauStats([], empty=True)
        if len(found) > sample_size:
            idx = rng.choice(len(found), size=sample_size, replace=False)
            found = [found[int(j)] for j in idx]
        for t in found:
            values.append(tau_of(kstate, net, i, t))
        return TauStats(values, empty=False)

    # rejection sampling over candidates, uniform across anchors by weight
    weights = np.array([c for _, _, _, c in pools], dtype=float)
    weights /= weights.sum()
    tries = 0
    max_tries = 50 * sample_size
    while len(values) < sample_size and tries < max_tries:
        tries += 1
        a = int(rng.choice(len(pools), p=weights))
        anchor, pool, covers, _ = pools[a]
        members = bits_list(pool)
        pick = rng.choice(len(members), size=k1, replace=False)
        s = 0
        for idx in pick:
            s |= bit(members[int(idx)])
        if any(s & c == s for c in covers):
            continue
        values.append(tau_of(kstate, net, i, s | bit(anchor)))
    if not values:
        return TauStats([], empty=True)
    return TauStats(values, empty=False)


def undirected_components(net: RealizedNetwork, indirect_only: bool = True) -> list[list[int]]:
    """Connected components of the realized learning graph, edges undirected."""
    adj: list[set[int]] = [set() for _ in range(net.n)]
    for i in range(net.n):
        sources = net.indirect_from[i] if indirect_only else net.direct_from[i]
        for j in sources:
            adj[i].add(j)
            adj[j].add(i)
    seen = [False] * net.n
    comps = []
    for s in range(net.n):
        if seen[s]:
            continue
        stack = [s]
        seen[s] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(comp)
    return comps


def largest_component(net: RealizedNetwork, indirect_only: bool = True) -> list[int]:
    comps = undirected_components(net, indirect_only)
    return max(comps, key=len)


def learned_counts(kstate: KnowledgeState) -> np.ndarray:
    return np.array([popcount(m) for m in kstate.learned], dtype=np.int64)
