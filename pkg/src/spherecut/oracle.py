"""Brute-force ground truth.

Nothing here is shared with the DP or the solver: partitions are enumerated
from scratch as restricted-growth strings and every property is rechecked
with plain graph searches.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .graph import EmbeddedGraph, ProblemSpec

MAX_VERTICES = 14


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OraclePlan:
    """A plan as blocks of vertex ids, blocks ordered by smallest member."""

    blocks: tuple[tuple[int, ...], ...]
    weights: tuple[int, ...]
    cost: int
    cut_edges: tuple[int, ...]

    def assignment(self) -> dict[int, int]:
        return {v: i + 1 for i, b in enumerate(self.blocks) for v in b}


@dataclass
class OracleResult:
    plans: list[OraclePlan] = field(default_factory=list)
    histogram: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return len(self.plans)

    def min_cost(self) -> int | None:
        return min((p.cost for p in self.plans), default=None)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "histogram": [
                {"weights": list(w), "cost": c, "count": n} for (w, c), n in sorted(self.histogram.items())
            ],
        }


def _rgs_exact(n: int, k: int) -> Iterator[list[int]]:
    """Restricted-growth strings of length n using exactly k labels."""
    if n == 0:
        if k == 0:
            yield []
        return
    s = [0] * n

    def rec(i: int, top: int) -> Iterator[list[int]]:
        if top + 1 + (n - i) < k:
            return
        if i == n:
            if top + 1 == k:
                yield list(s)
            return
        for b in range(min(top + 2, k)):
            s[i] = b
            yield from rec(i + 1, max(top, b))

    yield from rec(1, 0)


def _rgs_any(n: int) -> Iterator[list[int]]:
    for k in range(1, n + 1):
        yield from _rgs_exact(n, k)
    if n == 0:
        yield []


def _connected(adj: dict[int, list[int]], block: set[int]) -> bool:
    start = next(iter(block))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w in block and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == block


def enumerate_all(g: EmbeddedGraph, spec: ProblemSpec, max_vertices: int = MAX_VERTICES) -> OracleResult:
    """Every partition into exactly k connected parts with weights in [L, U) and cost < S."""
    verts = sorted(g.weights)
    if len(verts) > max_vertices:
        raise TooLarge(f"oracle refuses {len(verts)} > {max_vertices} vertices")
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for e, (a, b) in g.ends.items():
        adj[a].append(b)
        adj[b].append(a)
    res = OracleResult()
    for s in _rgs_exact(len(verts), spec.k):
        blocks: list[set[int]] = [set() for _ in range(spec.k)]
        for v, b in zip(verts, s):
            blocks[b].add(v)
        weights = [sum(g.weights[v] for v in b) for b in blocks]
        if not all(spec.L <= w < spec.U for w in weights):
            continue
        if not all(_connected(adj, b) for b in blocks):
            continue
        lab = dict(zip(verts, s))
        cut = tuple(sorted(e for e, (a, b) in g.ends.items() if lab[a] != lab[b]))
        cost = sum(g.costs[e] for e in cut)
        if cost >= spec.S:
            continue
        plan = OraclePlan(tuple(tuple(sorted(b)) for b in blocks), tuple(weights), cost, cut)
        res.plans.append(plan)
        res.histogram[(tuple(sorted(weights)), cost)] += 1
    return res


def _rgs_tuple(labels: list) -> tuple[int, ...]:
    seen: dict = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


def cluster_table_oracle(
    g: EmbeddedGraph,
    edges: Iterable[int],
    spec: ProblemSpec,
    homes: dict[int, int],
    pouts: Iterable[tuple[int, ...]] | None = None,
    max_edges: int = 10,
) -> Counter:
    """Brute-force count for every configuration of the cluster made of ``edges``.

    Keys are ``(pin, pout, active, finished, cost)`` with partitions as RGS
    tuples over the id-sorted boundary.  ``pouts`` restricts the outside
    partitions considered (default: all of them).
    """
    C = set(edges)
    if len(C) > max_edges:
        raise TooLarge(f"cluster has {len(C)} > {max_edges} edges")
    inc: dict[int, int] = Counter()
    for e in C:
        for v in g.ends[e]:
            inc[v] += 1
    VC = sorted(inc)
    theta = [v for v in VC if inc[v] < len(g.rotation[v])]
    adj: dict[int, list[int]] = {v: [] for v in VC}
    for e in C:
        a, b = g.ends[e]
        adj[a].append(b)
        adj[b].append(a)
    hw = {v: (g.weights[v] if homes.get(v) in C else 0) for v in VC}
    if pouts is None:
        pouts = [tuple(s) for s in _rgs_any(len(theta))]
    pouts = list(pouts)

    out: Counter = Counter()
    for s in _rgs_any(len(VC)):
        rho = dict(zip(VC, s))
        blocks: dict[int, set[int]] = {}
        for v, b in rho.items():
            blocks.setdefault(b, set()).add(v)
        if not all(_connected_within(adj, rho, blk) for blk in blocks.values()):
            continue
        pin = _rgs_tuple([rho[v] for v in theta])
        cut = [e for e in C if rho[g.ends[e][0]] != rho[g.ends[e][1]]]
        cost = sum(g.costs[e] for e in cut)
        if cost >= spec.S:
            continue
        for pout in pouts:
            # nu = rho joined with pout, by relabelling to a common representative
            parent = {("r", b): ("r", b) for b in blocks}

            def find(x):
                while parent[x] != x:
                    x = parent[x]
                return x

            first: dict[int, int] = {}
            for v, lab in zip(theta, pout):
                if lab in first:
                    ra, rb = find(("r", rho[first[lab]])), find(("r", rho[v]))
                    if ra != rb:
                        parent[ra] = rb
                else:
                    first[lab] = v
            nu = {v: find(("r", rho[v])) for v in VC}
            if any(nu[g.ends[e][0]] == nu[g.ends[e][1]] for e in cut):
                continue
            weight: Counter = Counter()
            for v in VC:
                weight[nu[v]] += hw[v]
            order = []
            for v in theta:
                if nu[v] not in order:
                    order.append(nu[v])
            active = tuple(weight[r] for r in order)
            finished = tuple(sorted(weight[r] for r in set(nu.values()) if r not in order))
            if any(a >= spec.U for a in active) or not all(spec.L <= f < spec.U for f in finished):
                continue
            if len(active) + len(finished) > spec.k:
                continue
            out[(pin, tuple(pout), active, finished, cost)] += 1
    return out


def _connected_within(adj: dict[int, list[int]], rho: dict[int, int], block: set[int]) -> bool:
    start = next(iter(block))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if rho[w] == rho[v] and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == block


def cluster_count_oracle(
    g: EmbeddedGraph,
    edges: Iterable[int],
    config: tuple,
    spec: ProblemSpec,
    homes: dict[int, int],
) -> int:
    """count(config) for one configuration ``(pin, pout, active, finished, cost)``."""
    pin, pout, active, finished, cost = config
    return cluster_table_oracle(g, edges, spec, homes, pouts=[tuple(pout)]).get(
        (tuple(pin), tuple(pout), tuple(active), tuple(finished), cost), 0
    )
