"""Knowledge closure: what each firm ends up learning on a realized network.

A direct arc (i <- j) hands i the ideas j discovered itself.  An indirect arc
additionally hands i everything j learned from others, transitively.  Cycles of
indirect arcs are resolved as the least fixed point, which the strongly
connected component condensation computes directly: members of a component
share one aggregate, and aggregates accumulate along condensation edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .bitset import bit, iter_bits
from .network import RealizedNetwork


def tarjan_scc(n: int, adjacency: list[list[int]]) -> tuple[list[int], list[list[int]]]:
    """Iterative Tarjan.  Returns (component id per node, members per component).

    Components are emitted children-first: every edge of the condensation goes
    from a later-emitted component to an earlier-emitted one.
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comp_id = [-1] * n
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, ptr = work[-1]
            if ptr == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            adj = adjacency[node]
            while ptr < len(adj):
                nxt = adj[ptr]
                ptr += 1
                if index[nxt] == -1:
                    work[-1] = (node, ptr)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if on_stack[nxt]:
                    if low[nxt] < low[node]:
                        low[node] = low[nxt]
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                members = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_id[w] = len(comps)
                    members.append(w)
                    if w == node:
                        break
                comps.append(members)
            if work:
                parent = work[-1][0]
                if low[node] < low[parent]:
                    low[parent] = low[node]
    return comp_id, comps


@dataclass
class KnowledgeState:
    """Closure result.  `learned[i]` is the idea mask I_i (own ideas excluded);
    `reach[i]` is the firm mask R(i) of everyone i draws on indirectly."""

    n: int
    total_ideas: int
    learned: list[int]
    reach: list[int]
    direct_ideas: list[int]
    comp_id: list[int]
    comp_members: list[list[int]]
    comp_agg: list[int]
    comp_reach: list[int]
    comp_edges: list[set[int]]
    _knowers: Optional[list[int]] = field(default=None, repr=False)
    _coreach: Optional[list[int]] = field(default=None, repr=False)

    def knowledge_mask(self, net: RealizedNetwork, i: int) -> int:
        return self.learned[i] | net.discovered[i]

    def knowers(self, idea: int) -> int:
        """Firms that learned `idea` from others (reverse index, built lazily)."""
        if self._knowers is None:
            kn = [0] * self.total_ideas
            for j in range(self.n):
                for m in iter_bits(self.learned[j]):
                    kn[m] |= bit(j)
            self._knowers = kn
        return self._knowers[idea]

    def coreach_incl(self, i: int) -> int:
        """Mask of firms that reach i through indirect arcs, plus i itself."""
        if self._coreach is None:
            ncomp = len(self.comp_members)
            comp_co = [0] * ncomp
            members_mask = [0] * ncomp
            for c, members in enumerate(self.comp_members):
                m = 0
                for v in members:
                    m |= bit(v)
                members_mask[c] = m
            # components are emitted children-first, so walk them in that order
            # and push masks down: predecessors of c are components with an edge
            # into c, which are emitted after c.
            preds: list[list[int]] = [[] for _ in range(ncomp)]
            for c, succs in enumerate(self.comp_edges):
                for s in succs:
                    preds[s].append(c)
            for c in range(ncomp - 1, -1, -1):
                acc = members_mask[c]
                for p in preds[c]:
                    acc |= comp_co[p]
                comp_co[c] = acc
            self._coreach = [comp_co[self.comp_id[i]] for i in range(self.n)]
        return self._coreach[i]


def knowledge_closure(net: RealizedNetwork) -> KnowledgeState:
    n = net.n
    direct_ideas = [0] * n
    for i in range(n):
        acc = 0
        for j in net.direct_from[i]:
            acc |= net.discovered[j]
        direct_ideas[i] = acc

    comp_id, comps = tarjan_scc(n, net.indirect_from)
    ncomp = len(comps)
    comp_agg = [0] * ncomp
    comp_reach = [0] * ncomp
    comp_edges: list[set[int]] = [set() for _ in range(ncomp)]
    # children-first emission order makes a single pass sufficient
    for c, members in enumerate(comps):
        agg = 0
        reach_mask = 0
        edges = comp_edges[c]
        for v in members:
            agg |= direct_ideas[v]
            reach_mask |= bit(v)
            for w in net.indirect_from[v]:
                cw = comp_id[w]
                if cw != c:
                    edges.add(cw)
        for cw in edges:
            agg |= comp_agg[cw]
            reach_mask |= comp_reach[cw]
        comp_agg[c] = agg
        comp_reach[c] = reach_mask

    learned = [0] * n
    reach = [0] * n
    for i in range(n):
        learned[i] = comp_agg[comp_id[i]] & ~net.own_mask(i)
        r = 0
        for j in net.indirect_from[i]:
            r |= comp_reach[comp_id[j]]
        reach[i] = r

    return KnowledgeState(n=n, total_ideas=net.total_ideas, learned=learned, reach=reach,
                          direct_ideas=direct_ideas, comp_id=comp_id, comp_members=comps,
                          comp_agg=comp_agg, comp_reach=comp_reach, comp_edges=comp_edges)


def closure_for_firm(net: RealizedNetwork, i: int) -> int:
    """I_i alone, by walking indirect arcs from i.  Cheaper than the full
    closure when one firm's knowledge is all that is needed."""
    acc = 0
    for j in net.direct_from[i]:
        acc |= net.discovered[j]
    stack = list(net.indirect_from[i])
    visited = set()
    while stack:
        v = stack.pop()
        if v in visited:
            continue
        visited.add(v)
        for j in net.direct_from[v]:
            acc |= net.discovered[j]
        stack.extend(w for w in net.indirect_from[v] if w not in visited)
    return acc & ~net.own_mask(i)
