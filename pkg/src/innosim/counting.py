"""Counting proprietary technologies on a realized closure.

A technology is a k-subset of discovered ideas.  It belongs to firm i when it
contains one of i's own discovered ideas, every other member is in i's learned
set, and no other firm knows all of it.  Technologies are attributed to their
lowest-index own idea so that multi-idea firms never double count.

Three counting strategies, used in this order:

  exact   enumerate the (k-1)-subsets around an anchor when their number fits
          the budget
  ie      inclusion-exclusion over competitor knowledge sets when there are few
          enough distinct ones
  sample  unbiased subset-sampling estimate, as a last resort

The first two agree exactly; the acceptance suite checks that on hundreds of
random instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .bitset import bit, bits_list, is_subset, iter_bits, popcount
from .config import FirmProfile, WorldConfig
from .errors import CompetitorCapExceeded, EnumerationBudgetExceeded, IntegrityError
from .knowledge import KnowledgeState
from .network import RealizedNetwork

EXACT_BUDGET = 10 ** 6
COMPETITOR_CAP = 20
SAMPLE_DEFAULT = 20_000


def comb(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def check_state(kstate: KnowledgeState, net: RealizedNetwork) -> None:
    if kstate.n != net.n or kstate.total_ideas != net.total_ideas:
        raise IntegrityError("knowledge state and network describe different worlds")
    for i in range(net.n):
        if kstate.learned[i] & net.own_mask(i):
            raise IntegrityError("closure contains a firm's own ideas; state mismatch")


def anchor_pools(kstate: KnowledgeState, net: RealizedNetwork, i: int) -> list[tuple[int, int]]:
    """(anchor idea, candidate pool mask) pairs for firm i.

    The pool excludes own ideas at or below the anchor, which attributes each
    technology to its lowest own idea exactly once.
    """
    own = net.discovered[i]
    out = []
    for m in iter_bits(own):
        higher_own = own & ~((bit(m) << 1) - 1)
        out.append((m, (kstate.learned[i] | higher_own)))
    return out


def competitor_covers(kstate: KnowledgeState, net: RealizedNetwork, i: int,
                      anchor: int, pool: int) -> list[int]:
    """Knowledge overlap with `pool` for every rival that knows the anchor.

    Deduplicated, dominated sets dropped, and sets too small to cover any
    (k-1)-subset are kept out by the callers' popcount checks.
    """
    rivals = kstate.knowers(anchor) & ~bit(i)
    masks = set()
    for j in iter_bits(rivals):
        masks.add((kstate.learned[j] | net.discovered[j]) & pool)
    covers = sorted(masks, reverse=True)
    keep: list[int] = []
    for c in covers:
        if not any(is_subset(c, other) for other in keep):
            keep.append(c)
    return keep


# ---------------------------------------------------------------------------
# Strategy primitives on (pool, covers)
# ---------------------------------------------------------------------------


def multiplicity_exact(pool: int, covers: Sequence[int], k1: int,
                       budget: int = EXACT_BUDGET) -> dict[int, int]:
    """Count (k-1)-subsets of pool by how many covers contain them."""
    total = comb(popcount(pool), k1)
    if total > budget:
        raise EnumerationBudgetExceeded(f"{total} subsets exceed budget {budget}")
    members = bits_list(pool)
    out: dict[int, int] = {}
    for combo in combinations(members, k1):
        s = 0
        for b in combo:
            s |= bit(b)
        m = sum(1 for c in covers if is_subset(s, c))
        out[m] = out.get(m, 0) + 1
    return out


def _subset_sums(pool: int, covers: Sequence[int], k1: int, cap: int) -> list[int]:
    """S_j = sum over j-subsets T of covers of C(|intersection of T|, k-1)."""
    if len(covers) > cap:
        raise CompetitorCapExceeded(f"{len(covers)} covers exceed cap {cap}")
    sums = [0] * (len(covers) + 1)
    sums[0] = comb(popcount(pool), k1)

    def rec(start: int, inter: int, depth: int) -> None:
        for r in range(start, len(covers)):
            ni = inter & covers[r]
            c = comb(popcount(ni), k1)
            if c:
                sums[depth + 1] += c
                rec(r + 1, ni, depth + 1)

    rec(0, pool, 0)
    return sums


def count_uncovered_ie(pool: int, covers: Sequence[int], k1: int,
                       cap: int = COMPETITOR_CAP) -> int:
    """Subsets covered by nobody, via inclusion-exclusion over the covers."""
    sums = _subset_sums(pool, covers, k1, cap)
    total = 0
    for j, s in enumerate(sums):
        total += s if j % 2 == 0 else -s
    return total


def multiplicity_ie(pool: int, covers: Sequence[int], k1: int,
                    cap: int = COMPETITOR_CAP) -> dict[int, int]:
    """Multiplicity distribution from the same subset sums.

    N_m = sum_{j >= m} (-1)^(j-m) C(j, m) S_j counts subsets lying in exactly m
    of the cover sets.  Note covers here are deduplicated rival knowledge sets,
    so m counts distinct rival knowledge patterns, which is what the exact
    enumeration above counts as well.
    """
    sums = _subset_sums(pool, covers, k1, cap)
    out: dict[int, int] = {}
    for m in range(len(sums)):
        acc = 0
        for j in range(m, len(sums)):
            term = comb(j, m) * sums[j]
            acc += term if (j - m) % 2 == 0 else -term
        if acc:
            out[m] = acc
    return out


def sample_uncovered(pool: int, covers: Sequence[int], k1: int,
                     rng: np.random.Generator, samples: int = SAMPLE_DEFAULT) -> tuple[float, float]:
    """(estimated uncovered count, standard error) by uniform subset sampling."""
    members = np.array(bits_list(pool), dtype=np.int64)
    total = comb(len(members), k1)
    if total == 0:
        return 0.0, 0.0
    hits = 0
    for _ in range(samples):
        pick = rng.choice(len(members), size=k1, replace=False)
        s = 0
        for b in pick:
            s |= bit(int(members[b]))
        if not any(is_subset(s, c) for c in covers):
            hits += 1
    frac = hits / samples
    se = math.sqrt(max(frac * (1 - frac), 0.0) / samples) * total
    return frac * total, se


# ---------------------------------------------------------------------------
# Public per-firm counting API
# ---------------------------------------------------------------------------


def count_proprietary_exact(kstate: KnowledgeState, net: RealizedNetwork,
                            world: WorldConfig, i: int,
                            budget: int = EXACT_BUDGET) -> dict[int, int]:
    """Exact proprietary count per anchor idea of firm i (enumeration)."""
    check_state(kstate, net)
    out = {}
    k1 = world.k - 1
    for anchor, pool in anchor_pools(kstate, net, i):
        covers = [c for c in competitor_covers(kstate, net, i, anchor, pool)
                  if popcount(c) >= k1]
        dist = multiplicity_exact(pool, covers, k1, budget)
        out[anchor] = dist.get(0, 0)
    return out


def count_proprietary_ie(kstate: KnowledgeState, net: RealizedNetwork,
                         world: WorldConfig, i: int,
                         competitor_cap: int = COMPETITOR_CAP) -> dict[int, int]:
    """Same counts through inclusion-exclusion over competitor knowledge sets."""
    check_state(kstate, net)
    out = {}
    k1 = world.k - 1
    for anchor, pool in anchor_pools(kstate, net, i):
        covers = [c for c in competitor_covers(kstate, net, i, anchor, pool)
                  if popcount(c) >= k1]
        out[anchor] = count_uncovered_ie(pool, covers, k1, competitor_cap)
    return out


def enumerate_proprietary(kstate: KnowledgeState, net: RealizedNetwork,
                          world: WorldConfig, i: int,
                          budget: int = EXACT_BUDGET) -> list[tuple[int, ...]]:
    """The proprietary technologies themselves, as sorted idea tuples."""
    check_state(kstate, net)
    k1 = world.k - 1
    found = []
    for anchor, pool in anchor_pools(kstate, net, i):
        covers = [c for c in competitor_covers(kstate, net, i, anchor, pool)
                  if popcount(c) >= k1]
        members = bits_list(pool)
        if comb(len(members), k1) > budget:
            raise EnumerationBudgetExceeded("pool too large to enumerate")
        for combo in combinations(members, k1):
            s = 0
            for b in combo:
                s |= bit(b)
            if not any(is_subset(s, c) for c in covers):
                found.append(tuple(sorted((anchor,) + combo)))
    return sorted(found)


def weighted_subset_count(class_counts: Sequence[int], class_weights: Sequence[float],
                          size: int) -> float:
    """Sum over `size`-subsets of a pool of the product of member weights,
    where the pool holds class_counts[c] items of weight class_weights[c].

    Coefficient of z^size in prod_c (1 + w_c z)^(y_c); this is what turns a
    subset count into its discovery-probability weight when idea owners have
    heterogeneous p.
    """
    coeff = [0.0] * (size + 1)
    coeff[0] = 1.0
    for y, w in zip(class_counts, class_weights):
        if y == 0:
            continue
        # multiply by (1 + w z)^y, truncated at z^size
        binom = [comb(y, j) * (w ** j) for j in range(min(y, size) + 1)]
        new = [0.0] * (size + 1)
        for a, ca in enumerate(coeff):
            if ca == 0.0:
                continue
            for b, cb in enumerate(binom):
                if a + b > size:
                    break
                new[a + b] += ca * cb
        coeff = new
    return coeff[size]
