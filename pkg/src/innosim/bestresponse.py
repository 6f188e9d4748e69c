"""Common-random-number deviator evaluation.

The solver's inner loop asks: holding everyone else fixed, what does one firm
earn at each candidate openness level?  Naive simulation would re-run the
whole world per candidate; instead the opponents' network is sampled once per
replication and the deviator's arcs are re-thresholded against stored
uniforms, so every candidate level sees the same draws and the argmax is
stable at modest replication counts.

Two layers of integration keep variance down further:

  * Discovery randomness is integrated exactly.  Conditional on arcs, the
    expected monopoly count is a weighted subset count over the
    all-discovered closure, weights being the idea owners' investment levels.
  * Indirect flags on the deviator's outgoing arcs are integrated exactly: a
    flagged outgoing arc hands the deviator's whole position to the learner,
    so the conditional value carries a factor (1-delta)^|out| with the
    remaining learners treated as direct.

With no indirect transmission at all (delta=0) the opponents' own arcs are
integrated analytically too, and no opponent network is sampled.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .bitset import bit, bits_list, is_subset, iter_bits, popcount
from .config import FirmProfile, WorldConfig, budget_profile, with_q
from .counting import comb, count_uncovered_ie, weighted_subset_count
from .errors import ConfigError
from .knowledge import KnowledgeState, knowledge_closure
from .montecarlo import rep_rng
from .network import RealizedNetwork, arc_probability, sample_learning_network


# ---------------------------------------------------------------------------
# Weighted uncovered counts
# ---------------------------------------------------------------------------


class Weighter:
    """Measure(mask) = sum over (k-1)-subsets of mask of member p-weights."""

    def __init__(self, k1: int, uniform_p: Optional[float],
                 class_masks: Sequence[int], class_weights: Sequence[float]):
        self.k1 = k1
        self.uniform_p = uniform_p
        self.class_masks = list(class_masks)
        self.class_weights = list(class_weights)

    def __call__(self, mask: int) -> float:
        if self.uniform_p is not None:
            return (self.uniform_p ** self.k1) * comb(popcount(mask), self.k1)
        counts = [popcount(mask & cm) for cm in self.class_masks]
        return weighted_subset_count(counts, self.class_weights, self.k1)


def _maximal(masks) -> list[int]:
    keep: list[int] = []
    for c in sorted(set(masks), reverse=True):
        if c and not any(is_subset(c, o) for o in keep):
            keep.append(c)
    return keep


def weighted_uncovered(pool: int, covers: Sequence[int], measure: Weighter) -> float:
    """Weighted count of (k-1)-subsets of pool inside no cover set."""
    covers = _maximal(c & pool for c in covers)
    total = measure(pool)

    def rec(start: int, inter: int, sign: float) -> float:
        acc = 0.0
        for r in range(start, len(covers)):
            ni = inter & covers[r]
            m = measure(ni)
            if m:
                acc += sign * m + rec(r + 1, ni, -sign)
        return acc

    return total + rec(0, pool, -1.0)


# ---------------------------------------------------------------------------
# Opponent model
# ---------------------------------------------------------------------------


@dataclass
class OppState:
    net: object
    kstate: KnowledgeState
    know: list[int]
    u_in: np.ndarray
    v_in: np.ndarray
    u_out: np.ndarray
    v_out: np.ndarray
    disc_mask: Optional[int] = None
    w_dev: float = 1.0
    wk: Optional[np.ndarray] = None


class DeviatorModel:
    """Precomputed structure for evaluating one firm against fixed opponents.

    `units` lists the distinct opposing nodes; a unit with count>1 is a
    collapsed block of identical always-relaying firms (valid only when
    delta=1 and links are free), whose ideas live on one supernode.
    """

    def __init__(self, world: WorldConfig, opponents: Sequence[FirmProfile],
                 template: FirmProfile, coord: Optional[str] = None):
        if template.sigma != 1:
            raise ConfigError("deviator evaluation supports single-idea deviators")
        if coord is not None and coord not in ("q0", "q1"):
            raise ConfigError(f"unknown rate coordinate {coord!r}")
        self.world = world
        self.template = template
        self.coord = coord
        self.variant = world.payoff.variant
        self.realized = self.variant in ("rho", "phi")
        ft = world.payoff.f_table or (1.0,)
        self.f_const_tail = len(set(ft[1:])) <= 1 if len(ft) > 1 else True
        if self.variant == "competition" and len(ft) > 3 and not self.f_const_tail:
            raise ConfigError(
                "best-response evaluation handles crowding tables up to "
                "length 3 (or a constant tail); longer tables are only "
                "supported by the payoff simulator")

        collapse = self._collapsible(world, opponents)
        if collapse is not None:
            blob_prof, blob_members, rest = collapse
            self.units = [(pr, 1) for pr in rest] + [(blob_prof, len(blob_members))]
        else:
            self.units = [(pr, 1) for pr in opponents]
        self.n_units = len(self.units)

        sigma = []
        for prof, cnt in self.units:
            sigma.append(prof.sigma * cnt)
        self.sigma = tuple(sigma)
        offsets = [0]
        for s in sigma:
            offsets.append(offsets[-1] + s)
        self.offsets = offsets
        self.total_ideas = offsets[-1]
        self.own_full = [(((1 << sigma[u]) - 1) << offsets[u])
                         for u in range(self.n_units)]

        # idea classes by (owner p, usability); patented ideas leave the pool
        self.patented_mask = 0
        self.public_units = [u for u, (pr, _) in enumerate(self.units) if pr.public]
        by_p: dict[float, int] = {}
        for u, (prof, cnt) in enumerate(self.units):
            if self.variant == "patents" and prof.patented:
                self.patented_mask |= self.own_full[u]
                continue
            by_p[prof.p] = by_p.get(prof.p, 0) | self.own_full[u]
        self.class_weights = sorted(by_p)
        self.class_masks = [by_p[p] for p in self.class_weights]
        uniform = self.class_weights[0] if len(self.class_weights) == 1 else None
        self.measure = Weighter(world.k - 1, uniform, self.class_masks,
                                self.class_weights)
        self.immune = (self.variant == "public" and template.public) or \
                      (self.variant == "patents" and template.patented)

        self.opp_world = replace(world, n=self.n_units) if self.n_units >= 2 else None
        self.idea_p = np.empty(self.total_ideas)
        for u, (prof, _) in enumerate(self.units):
            self.idea_p[self.offsets[u]:self.offsets[u + 1]] = prof.p

    def _collapsible(self, world, opponents):
        # supernode: identical fully open relays under full indirect
        # transmission and free links share one closure, so they act as a
        # single node.  Needs certain member-member arcs (beta 1, q 1).
        if world.delta != 1.0 or world.link_cost != 0.0 or self.realized:
            return None
        flag = "public" if self.variant == "public" else (
            "patented" if self.variant == "patents" else None)
        if flag is None:
            return None
        members = [pr for pr in opponents if getattr(pr, flag)]
        rest = [pr for pr in opponents if not getattr(pr, flag)]
        if len(members) < 2 or len(set(members)) != 1:
            return None
        m0 = members[0]
        if m0.sigma != 1 or m0.budget_mode or arc_probability(m0, m0) != 1.0:
            return None
        return m0, members, rest

    def deviator_at(self, q: float) -> FirmProfile:
        if self.coord is not None:
            return replace(self.template, **{self.coord: q})
        if self.template.budget_mode:
            return budget_profile(self.world, q, self.template.budget_rate)
        return with_q(self.template, q)

    def thresholds(self, dev: FirmProfile) -> tuple[np.ndarray, np.ndarray]:
        t_in = np.empty(self.n_units)
        t_out = np.empty(self.n_units)
        for u, (prof, cnt) in enumerate(self.units):
            pi = arc_probability(dev, prof)
            po = arc_probability(prof, dev)
            t_in[u] = pi if cnt == 1 else 1.0 - (1.0 - pi) ** cnt
            t_out[u] = po if cnt == 1 else 1.0 - (1.0 - po) ** cnt
        return t_in, t_out

    def sample_state(self, net_rng: np.random.Generator,
                     arc_rng: np.random.Generator,
                     disc_rng: np.random.Generator) -> OppState:
        # the three pieces draw from separate streams so that a change in the
        # population template perturbs only the network piece; the deviator
        # arc uniforms and discovery draws stay identical, which keeps the
        # sampled best-response map stable under fixed-point iteration
        if any(cnt > 1 for _, cnt in self.units):
            net = self._sample_collapsed(net_rng)
        elif self.n_units >= 2:
            profs = [prof for prof, _ in self.units]
            net = sample_learning_network(self.opp_world, profs, net_rng,
                                          discovered=list(self.own_full))
        else:
            net = RealizedNetwork(n=1, sigma=self.sigma,
                                  discovered=list(self.own_full),
                                  direct_from=[[]], indirect_from=[[]])
        kstate = knowledge_closure(net)
        know = [kstate.learned[j] | net.discovered[j] for j in range(self.n_units)]
        u_in = arc_rng.random(self.n_units)
        v_in = arc_rng.random(self.n_units)
        u_out = arc_rng.random(self.n_units)
        v_out = arc_rng.random(self.n_units)
        st = OppState(net=net, kstate=kstate, know=know, u_in=u_in, v_in=v_in,
                      u_out=u_out, v_out=v_out)
        if self.realized:
            w = disc_rng.random(self.total_ideas)
            mask = 0
            for idx in np.nonzero(w < self.idea_p)[0]:
                mask |= bit(int(idx))
            st.disc_mask = mask
            st.w_dev = float(disc_rng.random())
        return st

    def _sample_collapsed(self, rng: np.random.Generator):
        blob = self.n_units - 1
        blob_prof, blob_cnt = self.units[blob]
        rest = [prof for prof, _ in self.units[:blob]]
        if rest:
            rest_world = replace(self.world, n=len(rest)) if len(rest) >= 2 else None
            if rest_world is not None:
                base = sample_learning_network(rest_world, rest, rng,
                                               discovered=list(self.own_full[:blob]))
                direct = [list(s) for s in base.direct_from]
                indirect = [list(s) for s in base.indirect_from]
            else:
                direct, indirect = [[]], [[]]
        else:
            direct, indirect = [], []
        direct.append([])
        indirect.append([])
        u_to = rng.random(len(rest))
        u_from = rng.random(len(rest))
        for j, prof in enumerate(rest):
            p_learn = 1.0 - (1.0 - arc_probability(prof, blob_prof)) ** blob_cnt
            if u_to[j] < p_learn:
                direct[j].append(blob)
                indirect[j].append(blob)
            p_teach = 1.0 - (1.0 - arc_probability(blob_prof, prof)) ** blob_cnt
            if u_from[j] < p_teach:
                direct[blob].append(j)
                indirect[blob].append(j)
        return RealizedNetwork(n=self.n_units, sigma=self.sigma,
                               discovered=list(self.own_full),
                               direct_from=direct, indirect_from=indirect)


# ---------------------------------------------------------------------------
# Evaluation contexts
# ---------------------------------------------------------------------------


@dataclass
class EvalPoint:
    q: float
    p_dev: float
    payoff: float
    payoff_se: float
    base: float
    base_se: float
    link_cost: float


class BRContext:
    """Grid-point evaluator over a fixed set of opponent replications."""

    def __init__(self, world: WorldConfig, opponents: Sequence[FirmProfile],
                 template: FirmProfile, reps: int, seed: int,
                 key: Sequence[int] = (), threads: int = 1,
                 coord: Optional[str] = None):
        self.model = DeviatorModel(world, opponents, template, coord)
        self.world = world
        self.reps = reps
        self.states: list[Optional[OppState]] = [None] * reps

        def build(rep: int) -> None:
            self.states[rep] = self.model.sample_state(
                rep_rng(seed, rep, (*key, 0)),
                rep_rng(seed, rep, (*key, 1)),
                rep_rng(seed, rep, (*key, 2)))

        if threads <= 1:
            for rep in range(reps):
                build(rep)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(build, range(reps)))
        self._cache: dict[float, EvalPoint] = {}

    def eval_q(self, q: float) -> EvalPoint:
        hit = self._cache.get(q)
        if hit is not None:
            return hit
        model = self.model
        world = self.world
        dev = model.deviator_at(q)
        t_in, t_out = model.thresholds(dev)
        no_out = float(np.prod(1.0 - t_out))
        rb = self._rb_terms(t_in)
        base = np.empty(self.reps)
        for rep, st in enumerate(self.states):
            base[rep] = self._state_value(st, t_in, t_out, no_out, rb)
        base_mean = float(np.mean(base))
        base_se = float(np.std(base, ddof=1) / math.sqrt(self.reps)) \
            if self.reps > 1 else 0.0
        link = world.link_cost * float(np.sum(t_in))
        cost = 0.0 if dev.budget_mode else world.cost.value(dev.p)
        point = EvalPoint(q=q, p_dev=dev.p,
                          payoff=dev.p * base_mean - cost - link,
                          payoff_se=dev.p * base_se,
                          base=base_mean, base_se=base_se, link_cost=link)
        self._cache[q] = point
        return point

    def _pool(self, model, st, t_in) -> int:
        delta = self.world.delta
        pool = 0
        for u in np.nonzero(st.u_in < t_in)[0]:
            u = int(u)
            if st.v_in[u] < delta:
                pool |= st.know[u]
            else:
                pool |= st.net.discovered[u]
        return pool & ~model.patented_mask

    def _rb_terms(self, t_in: np.ndarray):
        """Exclusive-stratum factors for integrating single in-arc draws.

        The value of the learned pool is heavy tailed near criticality: most
        replications pull nothing, rare ones pull one whole cluster.  When
        the pool value is a plain measure of the union (full relaying, or an
        immune deviator) the zero- and one-arc strata integrate exactly, so
        only the two-or-more overlap part is left to the draws.
        """
        model = self.model
        world = self.world
        if model.realized:
            return None
        ok = model.immune or (world.delta == 1.0 and
                              (model.variant != "competition"
                               or model.f_const_tail))
        if not ok:
            return None
        ones = np.nonzero(t_in >= 1.0)[0]
        if len(ones) >= 2:
            return (0.0, None, None)
        if len(ones) == 1:
            j0 = int(ones[0])
            excl = float(np.prod(np.delete(1.0 - t_in, j0)))
            return (excl, None, j0)
        p_none = float(np.prod(1.0 - t_in))
        ratio = t_in / (1.0 - t_in)
        return (p_none, ratio, None)

    def _rb_weights(self, st: OppState) -> np.ndarray:
        if st.wk is None:
            model = self.model
            delta = self.world.delta
            measure = model.measure
            keep = ~model.patented_mask
            vals = np.empty(model.n_units)
            for j in range(model.n_units):
                full = st.know[j] & keep
                w = measure(full) if full else 0.0
                if delta < 1.0:
                    disc = st.net.discovered[j] & keep
                    wd = measure(disc) if disc else 0.0
                    w = delta * w + (1.0 - delta) * wd
                vals[j] = w
            st.wk = vals
        return st.wk

    def _state_value(self, st: OppState, t_in, t_out, no_out: float,
                     rb=None) -> float:
        model = self.model
        world = self.world
        delta = world.delta
        if model.realized:
            return self._state_value_realized(st, t_in, t_out)
        measure = model.measure

        if rb is not None:
            factor, ratio, j0 = rb
            wk = self._rb_weights(st)
            if ratio is not None:
                singles = factor * float(ratio @ wk)
            elif j0 is not None:
                singles = factor * float(wk[j0])
            else:
                singles = 0.0
            w = singles
            if int(np.count_nonzero(st.u_in < t_in)) >= 2:
                pool = self._pool(model, st, t_in)
                if pool:
                    w += measure(pool)
            if model.immune:
                return w
            if model.variant == "competition":
                return w * (no_out + (1.0 - no_out) * world.payoff.f(1))
            return no_out * w

        pool = self._pool(model, st, t_in)
        if not pool:
            return 0.0
        if model.immune:
            return measure(pool)

        if delta == 1.0 and (model.variant != "competition" or model.f_const_tail):
            w = measure(pool)
            if model.variant == "competition":
                return w * (no_out + (1.0 - no_out) * world.payoff.f(1))
            return no_out * w

        out_idx = [int(u) for u in np.nonzero(st.u_out < t_out)[0]]
        if not out_idx:
            return measure(pool)

        if model.variant == "competition":
            return self._competition_value(st, pool, out_idx)

        factor = (1.0 - delta) ** len(out_idx)
        if factor == 0.0:
            return 0.0
        rivals = 0
        for j in out_idx:
            rivals |= st.kstate.coreach_incl(j)
        covers = {st.know[x] & pool for x in iter_bits(rivals)}
        return factor * weighted_uncovered(pool, covers, model.measure)

    def _competition_value(self, st: OppState, pool: int, out_idx: list[int]) -> float:
        # realized indirect flags: a flagged learner (and everyone indirectly
        # downstream of any learner) counts as a full-pool rival
        model = self.model
        world = self.world
        delta = world.delta
        spec = world.payoff
        cover_of: dict[int, int] = {}
        for j in out_idx:
            full = st.v_out[j] < delta
            for x in iter_bits(st.kstate.coreach_incl(j)):
                if full:
                    cover_of[x] = pool
                elif x not in cover_of:
                    cover_of[x] = st.know[x] & pool
        masks = Counter(cover_of.values())
        measure = model.measure
        total = measure(pool)
        distinct = [m for m in masks if m]
        w0 = weighted_uncovered(pool, distinct, measure)
        if model.f_const_tail:
            return w0 + spec.f(1) * (total - w0)
        w1 = 0.0
        for r, cnt in masks.items():
            if cnt == 1 and r:
                w1 += weighted_uncovered(r, [o & r for o in distinct if o != r],
                                         measure)
        return w0 + spec.f(1) * w1 + spec.f(2) * (total - w0 - w1)

    def _state_value_realized(self, st: OppState, t_in, t_out) -> float:
        model = self.model
        world = self.world
        delta = world.delta
        pool = self._pool(model, st, t_in) & st.disc_mask
        out_idx = [int(u) for u in np.nonzero(st.u_out < t_out)[0]]
        if model.variant == "phi":
            if out_idx:
                return 0.0
            return world.payoff.phi(popcount(pool))
        # rho: realized monopoly count, raised to rho
        cover_of: dict[int, int] = {}
        for j in out_idx:
            if st.v_out[j] < delta:
                return 0.0
            for x in iter_bits(st.kstate.coreach_incl(j)):
                if x not in cover_of:
                    cover_of[x] = st.know[x] & pool
        covers = _maximal(cover_of.values())
        n0 = count_uncovered_ie(pool, covers, world.k - 1,
                                cap=len(covers) + 1)
        if n0 <= 0:
            return 0.0
        return float(n0) ** world.payoff.rho


class Delta0Context:
    """Direct-learning evaluator: opponents' arcs integrated in closed form.

    Valid when delta=0, every opponent has sigma=1, and the candidate pool is
    owned by a single opponent class.  Conditional on the deviator's realized
    in/out arcs, a rival knows a given pool idea independently with a fixed
    rate, which gives the monopoly count as a short sum over how many subset
    ideas belong to out-neighbors.
    """

    def __init__(self, world: WorldConfig, opponents: Sequence[FirmProfile],
                 template: FirmProfile, reps: int, seed: int,
                 key: Sequence[int] = (), threads: int = 1):
        if world.delta != 0.0:
            raise ConfigError("closed-form path requires delta=0")
        if any(pr.sigma != 1 for pr in opponents) or template.sigma != 1:
            raise ConfigError("closed-form path requires single-idea firms")
        if world.payoff.variant not in ("baseline", "patents"):
            raise ConfigError("closed-form path supports baseline or patents payoffs")
        self.world = world
        self.template = template
        self.variant = world.payoff.variant
        self.immune = self.variant == "patents" and template.patented

        classes: dict[FirmProfile, int] = {}
        for pr in opponents:
            classes[pr] = classes.get(pr, 0) + 1
        self.class_profiles = list(classes)
        self.class_counts = [classes[pr] for pr in self.class_profiles]
        usable = [c for c, pr in enumerate(self.class_profiles)
                  if not (self.variant == "patents" and pr.patented)]
        if len(usable) != 1:
            raise ConfigError("closed-form path needs one usable opponent class")
        self.pool_class = usable[0]
        self.n_opp = len(opponents)

        # member -> class index, fixed layout
        sel = []
        for c, cnt in enumerate(self.class_counts):
            sel.extend([c] * cnt)
        self.member_class = np.array(sel, dtype=np.int64)

        self.reps = reps
        rngs = [rep_rng(seed, rep, key) for rep in range(reps)]
        self.u_in = np.stack([r.random(self.n_opp) for r in rngs])
        self.u_out = np.stack([r.random(self.n_opp) for r in rngs])
        self._cache: dict[float, EvalPoint] = {}

    def deviator_at(self, q: float) -> FirmProfile:
        return with_q(self.template, q)

    def eval_q(self, q: float) -> EvalPoint:
        hit = self._cache.get(q)
        if hit is not None:
            return hit
        world = self.world
        k1 = world.k - 1
        dev = self.deviator_at(q)
        pool_prof = self.class_profiles[self.pool_class]
        p_w = pool_prof.p ** k1
        # rival knowledge rates toward a pool idea, by rival class
        rates = [arc_probability(pr, pool_prof) for pr in self.class_profiles]

        t_in = np.empty(self.n_opp)
        t_out = np.empty(self.n_opp)
        for c, pr in enumerate(self.class_profiles):
            mask = self.member_class == c
            t_in[mask] = arc_probability(dev, pr)
            t_out[mask] = arc_probability(pr, dev)

        pool_members = self.member_class == self.pool_class
        base = np.empty(self.reps)
        for rep in range(self.reps):
            inn = self.u_in[rep] < t_in
            out = self.u_out[rep] < t_out
            d = int(np.count_nonzero(inn & pool_members))
            if d < k1:
                base[rep] = 0.0
                continue
            if self.immune:
                base[rep] = p_w * comb(d, k1)
                continue
            o = int(np.count_nonzero(inn & out & pool_members))
            d_out = [int(np.count_nonzero(out & (self.member_class == c)))
                     for c in range(len(self.class_profiles))]
            acc = 0.0
            for a in range(0, min(o, k1) + 1):
                ways = comb(o, a) * comb(d - o, k1 - a)
                if ways == 0:
                    continue
                surv = 1.0
                for c, dc in enumerate(d_out):
                    r = rates[c]
                    if c == self.pool_class:
                        surv *= (1.0 - r ** (k1 - 1)) ** a if a else 1.0
                        surv *= (1.0 - r ** k1) ** (dc - a)
                    else:
                        surv *= (1.0 - r ** k1) ** dc
                acc += ways * surv
            base[rep] = p_w * acc
        base_mean = float(np.mean(base))
        base_se = float(np.std(base, ddof=1) / math.sqrt(self.reps)) \
            if self.reps > 1 else 0.0
        link = world.link_cost * float(np.sum(t_in))
        cost = world.cost.value(dev.p)
        point = EvalPoint(q=q, p_dev=dev.p,
                          payoff=dev.p * base_mean - cost - link,
                          payoff_se=dev.p * base_se,
                          base=base_mean, base_se=base_se, link_cost=link)
        self._cache[q] = point
        return point


def make_context(world: WorldConfig, opponents: Sequence[FirmProfile],
                 template: FirmProfile, reps: int, seed: int,
                 key: Sequence[int] = (), threads: int = 1,
                 coord: Optional[str] = None):
    if coord is None and world.delta == 0.0 \
            and world.payoff.variant in ("baseline", "patents") \
            and not template.directed \
            and all(pr.sigma == 1 and not pr.directed for pr in opponents) \
            and template.sigma == 1:
        try:
            return Delta0Context(world, opponents, template, reps, seed, key, threads)
        except ConfigError:
            pass
    return BRContext(world, opponents, template, reps, seed, key, threads, coord)
