"""Realized discovery and learning-network state, its sampling, and replay files."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bitset import all_mask, bit, iter_bits
from .config import FirmProfile, WorldConfig
from .errors import ConfigError, IntegrityError


def effective_rate(learner: FirmProfile, source: FirmProfile) -> float:
    """Interaction rate component of the direct-learning probability (no beta)."""
    if learner.budget_mode:
        # the learner alone controls how much it absorbs
        return learner.q
    if learner.directed or source.directed:
        lq = (learner.q0 if source.public else learner.q1) if learner.directed else learner.q
        sq = (source.q0 if learner.public else source.q1) if source.directed else source.q
        return lq * sq
    return learner.q * source.q


def arc_probability(learner: FirmProfile, source: FirmProfile) -> float:
    """Probability that `learner` acquires a direct arc from `source`."""
    return learner.beta * effective_rate(learner, source)


def arc_prob_matrix(world: WorldConfig, profiles: Sequence[FirmProfile]) -> np.ndarray:
    """Dense matrix P with P[i, j] = probability i learns directly from j, zero diagonal."""
    n = world.n
    out = np.zeros((n, n))
    for i, pi in enumerate(profiles):
        for j, pj in enumerate(profiles):
            if i != j:
                out[i, j] = arc_probability(pi, pj)
    return out


@dataclass
class RealizedNetwork:
    """One realization: which idea slots were discovered and who learned from whom.

    Arcs are stored learner-first: (i, j) in `direct` means firm i learned
    directly from firm j, and membership of (i, j) in `indirect` means i also
    learns indirectly through j (everything j learned from others).  Indirect
    arcs are always a subset of direct arcs.
    """

    n: int
    sigma: tuple[int, ...]
    discovered: list[int]          # per firm, global idea bits
    direct_from: list[list[int]]   # sources per learner
    indirect_from: list[list[int]]

    idea_offset: tuple[int, ...] = field(init=False)
    total_ideas: int = field(init=False)

    def __post_init__(self):
        offsets = []
        total = 0
        for s in self.sigma:
            offsets.append(total)
            total += s
        self.idea_offset = tuple(offsets)
        self.total_ideas = total

    def own_mask(self, i: int) -> int:
        return all_mask(self.sigma[i]) << self.idea_offset[i]

    def idea_owner(self, idea: int) -> int:
        # offsets are sorted; fine to scan for the small worlds where this is used
        owner = 0
        for i, off in enumerate(self.idea_offset):
            if off <= idea:
                owner = i
        return owner

    def direct_arcs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in self.direct_from[i]]

    def indirect_arcs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in self.indirect_from[i]]

    def validate(self) -> None:
        for i in range(self.n):
            if self.discovered[i] & ~self.own_mask(i):
                raise IntegrityError(f"firm {i} has discovery bits outside its own slots")
            direct = set(self.direct_from[i])
            if i in direct:
                raise IntegrityError(f"firm {i} has a self arc")
            if len(direct) != len(self.direct_from[i]):
                raise IntegrityError(f"firm {i} has duplicate direct arcs")
            indirect = set(self.indirect_from[i])
            if not indirect <= direct:
                raise IntegrityError(f"firm {i} has an indirect arc without its direct arc")


def idea_layout(profiles: Sequence[FirmProfile]) -> tuple[int, ...]:
    return tuple(pr.sigma for pr in profiles)


def sample_discoveries(profiles: Sequence[FirmProfile], rng: np.random.Generator) -> list[int]:
    """Each idea slot comes up independently with its owner's p."""
    sigma = idea_layout(profiles)
    total = sum(sigma)
    u = rng.random(total)
    masks = []
    pos = 0
    for pr, s in zip(profiles, sigma):
        m = 0
        for slot in range(s):
            if u[pos] < pr.p:
                m |= bit(pos)
            pos += 1
        masks.append(m)
    return masks


def network_from_uniforms(world: WorldConfig, profiles: Sequence[FirmProfile],
                          u_direct: np.ndarray, u_indirect: np.ndarray,
                          discovered: list[int]) -> RealizedNetwork:
    """Threshold a fixed array of uniforms into a network.

    Keeping this a pure function of (profiles, uniforms) is what makes the
    permutation-equivariance and monotonicity properties testable: raising any
    q with the same draws can only add arcs.
    """
    n = world.n
    prob = arc_prob_matrix(world, profiles)
    direct_from: list[list[int]] = [[] for _ in range(n)]
    indirect_from: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        row = u_direct[i]
        flag = u_indirect[i]
        pi = prob[i]
        for j in range(n):
            if i != j and row[j] < pi[j]:
                direct_from[i].append(j)
                if flag[j] < world.delta:
                    indirect_from[i].append(j)
    return RealizedNetwork(n=n, sigma=idea_layout(profiles), discovered=discovered,
                           direct_from=direct_from, indirect_from=indirect_from)


def _sample_distinct(rng: np.random.Generator, space: int, count: int) -> np.ndarray:
    """`count` distinct uniform indices out of `space`, cheap when count << space."""
    if count <= 0:
        return np.empty(0, dtype=np.int64)
    if count * 3 >= space:
        return rng.permutation(space)[:count].astype(np.int64)
    chosen: set[int] = set()
    need = count
    while need > 0:
        draw = rng.integers(0, space, size=need * 2)
        for v in draw:
            if v not in chosen:
                chosen.add(int(v))
                if len(chosen) == count:
                    break
        need = count - len(chosen)
    return np.sort(np.fromiter(chosen, dtype=np.int64, count=count))


_DENSE_LIMIT = 64


def sample_learning_network(world: WorldConfig, profiles: Sequence[FirmProfile],
                            rng: np.random.Generator,
                            discovered: Optional[list[int]] = None) -> RealizedNetwork:
    """Sample discoveries (unless given) and all direct/indirect arcs.

    Arc (i <- j) appears independently with probability beta_i * rate(i, j); given
    the arc, the indirect flag is an independent delta coin.  Small or fully
    heterogeneous populations go through a dense uniform matrix; larger ones are
    sampled per block of identical profiles with binomial counts, which is the
    same product measure without the n^2 draws.
    """
    n = world.n
    if discovered is None:
        discovered = sample_discoveries(profiles, rng)

    groups: dict[FirmProfile, list[int]] = {}
    for i, pr in enumerate(profiles):
        groups.setdefault(pr, []).append(i)

    if n <= _DENSE_LIMIT or len(groups) > 32:
        if n > 3000:
            raise ConfigError("dense sampling above n=3000 is not supported; reduce profile heterogeneity")
        u_direct = rng.random((n, n))
        u_indirect = rng.random((n, n))
        return network_from_uniforms(world, profiles, u_direct, u_indirect, discovered)

    direct_from: list[list[int]] = [[] for _ in range(n)]
    indirect_from: list[list[int]] = [[] for _ in range(n)]
    delta = world.delta
    group_items = list(groups.items())
    for prof_a, members_a in group_items:
        na = len(members_a)
        for prof_b, members_b in group_items:
            nb = len(members_b)
            p_arc = arc_probability(prof_a, prof_b)
            if p_arc <= 0.0:
                continue
            same = prof_a is prof_b or prof_a == prof_b
            space = na * (nb - 1) if same else na * nb
            if space <= 0:
                continue
            count = int(rng.binomial(space, p_arc))
            idx = _sample_distinct(rng, space, count)
            if count:
                flags = rng.random(count) < delta
            else:
                flags = np.empty(0, dtype=bool)
            width = (nb - 1) if same else nb
            for pos, flat in enumerate(idx):
                a_local, off = divmod(int(flat), width)
                learner = members_a[a_local]
                if same:
                    b_local = off + (1 if off >= a_local else 0)
                else:
                    b_local = off
                source = members_b[b_local]
                direct_from[learner].append(source)
                if flags[pos]:
                    indirect_from[learner].append(source)
    for lst in direct_from:
        lst.sort()
    for lst in indirect_from:
        lst.sort()
    return RealizedNetwork(n=n, sigma=idea_layout(profiles), discovered=discovered,
                           direct_from=direct_from, indirect_from=indirect_from)


# ---------------------------------------------------------------------------
# Replay files
# ---------------------------------------------------------------------------
# Line-oriented, hand-editable description of one realization with one idea
# slot per firm.  Sections, each introduced by its bare header line:
#
#   FIRMS <n>
#   DISCOVERED   one firm id per line
#   DIRECT       "<learner> <source>" per line
#   INDIRECT     subset of DIRECT, same format
#
# Ids are 0-based.  '#' starts a comment.  Unknown sections are rejected.

_SECTIONS = ("DISCOVERED", "DIRECT", "INDIRECT")


def parse_replay(text: str) -> RealizedNetwork:
    n = None
    discovered_ids: list[int] = []
    arcs: dict[str, list[tuple[int, int]]] = {"DIRECT": [], "INDIRECT": []}
    section = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "FIRMS":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise IntegrityError(f"bad FIRMS line: {raw!r}")
            n = int(tokens[1])
            continue
        if len(tokens) == 1 and tokens[0].isalpha() and tokens[0].isupper():
            if tokens[0] not in _SECTIONS:
                raise IntegrityError(f"unknown replay section {tokens[0]!r}")
            section = tokens[0]
            continue
        if section is None or n is None:
            raise IntegrityError(f"content before FIRMS/section header: {raw!r}")
        try:
            ids = [int(t) for t in tokens]
        except ValueError:
            raise IntegrityError(f"non-integer id in line {raw!r}") from None
        if any(v < 0 or v >= n for v in ids):
            raise IntegrityError(f"firm id out of range in line {raw!r}")
        if section == "DISCOVERED":
            if len(ids) != 1:
                raise IntegrityError(f"DISCOVERED lines carry one firm id: {raw!r}")
            discovered_ids.append(ids[0])
        else:
            if len(ids) != 2:
                raise IntegrityError(f"arc lines carry two ids: {raw!r}")
            if ids[0] == ids[1]:
                raise IntegrityError(f"self arc in line {raw!r}")
            arcs[section].append((ids[0], ids[1]))
    if n is None:
        raise IntegrityError("replay file has no FIRMS line")
    direct_from: list[list[int]] = [[] for _ in range(n)]
    indirect_from: list[list[int]] = [[] for _ in range(n)]
    seen = set()
    for i, j in arcs["DIRECT"]:
        if (i, j) in seen:
            raise IntegrityError(f"duplicate direct arc ({i}, {j})")
        seen.add((i, j))
        direct_from[i].append(j)
    for i, j in arcs["INDIRECT"]:
        if (i, j) not in seen:
            raise IntegrityError(f"indirect arc ({i}, {j}) has no direct arc")
        indirect_from[i].append(j)
    discovered = [0] * n
    for i in set(discovered_ids):
        discovered[i] = bit(i)
    net = RealizedNetwork(n=n, sigma=(1,) * n, discovered=discovered,
                          direct_from=direct_from, indirect_from=indirect_from)
    net.validate()
    return net


def format_replay(net: RealizedNetwork) -> str:
    if any(s != 1 for s in net.sigma):
        raise IntegrityError("replay files describe one idea slot per firm")
    lines = [f"FIRMS {net.n}", "DISCOVERED"]
    for i in range(net.n):
        if net.discovered[i]:
            lines.append(str(i))
    lines.append("DIRECT")
    for i, j in sorted(net.direct_arcs()):
        lines.append(f"{i} {j}")
    lines.append("INDIRECT")
    for i, j in sorted(net.indirect_arcs()):
        lines.append(f"{i} {j}")
    return "\n".join(lines) + "\n"


def load_replay(path) -> RealizedNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_replay(fh.read())
