"""Root queries: optimum, counts, unranking and exact uniform sampling.

Plans are unlabelled set partitions; the DP counts each exactly once.  A
:class:`Plan` numbers its districts 1..k by increasing smallest vertex id.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .decomp import SphereCutDecomposition, radial_bfs_decomposition, sweep_decomposition
from .dp import COUNT, MINCOST, Config, DPResult, consistent_children, leaf_cut, run_dp
from .graph import EmbeddedGraph, ProblemSpec, Reduction, preprocess

CostFilter = None | int | tuple[int, int]


class NoSolution(Exception):
    """No plan satisfies the request."""


@dataclass
class Plan:
    assignment: dict[int, int]
    weights: list[int]
    cost: int
    cut_edges: list[int]
    seed: int | None = None
    rank_p: int | None = None

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out: dict[int, list[int]] = {}
        for v in sorted(self.assignment):
            out.setdefault(self.assignment[v], []).append(v)
        return tuple(tuple(out[d]) for d in sorted(out))

    def to_dict(self) -> dict[str, Any]:
        return {
            "assignment": {str(v): d for v, d in sorted(self.assignment.items())},
            "weights": self.weights,
            "cost": self.cost,
            "cut_edges": self.cut_edges,
            "seed": self.seed,
            "rank_p": self.rank_p,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Plan":
        return cls(
            {int(v): int(d) for v, d in data["assignment"].items()},
            list(data["weights"]),
            int(data["cost"]),
            list(data["cut_edges"]),
            data.get("seed"),
            data.get("rank_p"),
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)


def plan_from_blocks(g: EmbeddedGraph, blocks) -> Plan:
    blocks = sorted((sorted(b) for b in blocks), key=lambda b: b[0])
    assignment = {v: i + 1 for i, b in enumerate(blocks) for v in b}
    cut = sorted(e for e, (a, b) in g.ends.items() if assignment[a] != assignment[b])
    return Plan(
        assignment,
        [sum(g.weights[v] for v in b) for b in blocks],
        sum(g.costs[e] for e in cut),
        cut,
    )


def plan_from_cuts(g: EmbeddedGraph, cut_edges) -> Plan:
    """Plan whose districts are the components left after deleting ``cut_edges``."""
    cut = set(cut_edges)
    comp: dict[int, int] = {}
    blocks = []
    for s in g.vertices:
        if s in comp:
            continue
        comp[s] = len(blocks)
        block = [s]
        stack = [s]
        while stack:
            v = stack.pop()
            for e in g.rotation[v]:
                w = g.other(e, v)
                if e not in cut and w not in comp:
                    comp[w] = comp[s]
                    block.append(w)
                    stack.append(w)
        blocks.append(block)
    return plan_from_blocks(g, blocks)


def validate_plan(g: EmbeddedGraph, spec: ProblemSpec, plan: Plan) -> list[str]:
    """Recompute everything about ``plan`` from scratch and list disagreements."""
    problems = []
    if set(plan.assignment) != set(g.weights):
        return ["assignment does not cover exactly the vertices"]
    districts: dict[int, set[int]] = {}
    for v, d in plan.assignment.items():
        districts.setdefault(d, set()).add(v)
    if sorted(districts) != list(range(1, spec.k + 1)):
        problems.append(f"districts {sorted(districts)} are not 1..{spec.k}")
    for d, vs in sorted(districts.items()):
        start = min(vs)
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in g.neighbors(v):
                if w in vs and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != vs:
            problems.append(f"district {d} is disconnected")
        w = sum(g.weights[v] for v in vs)
        if not spec.allows(w):
            problems.append(f"district {d} weight {w} outside [{spec.L}, {spec.U})")
    weights = [sum(g.weights[v] for v in districts[d]) for d in sorted(districts)]
    if weights != list(plan.weights):
        problems.append(f"weights {plan.weights} != recomputed {weights}")
    cut = sorted(e for e, (a, b) in g.ends.items() if plan.assignment[a] != plan.assignment[b])
    if cut != sorted(plan.cut_edges):
        problems.append("cut edge list mismatch")
    cost = sum(g.costs[e] for e in cut)
    if cost != plan.cost:
        problems.append(f"cost {plan.cost} != recomputed {cost}")
    if cost >= spec.S:
        problems.append(f"cost {cost} not below S={spec.S}")
    return problems


def _matches(cost: int, flt: CostFilter) -> bool:
    if flt is None:
        return True
    if isinstance(flt, tuple):
        return flt[0] <= cost <= flt[1]
    return cost == flt


def root_configs(res: DPResult, cost: CostFilter = None) -> list[tuple[Config, Any]]:
    """Root entries passing the filter, ordered by (cost, weights, partitions)."""
    if res.semiring == MINCOST:
        raise ValueError("root configs with explicit cost need the count or feasibility semiring")
    out = [(cfg, v) for cfg, v in res.root_entries() if v and _matches(cfg.cost, cost)]
    return sorted(out, key=lambda cv: (cv[0].cost, cv[0].finished, cv[0].pin, cv[0].pout))


def _plan_from_leaves(res: DPResult, assigned: dict[int, Config]) -> Plan:
    d = res.decomposition
    cuts = [
        next(iter(d.clusters[cid].edges))
        for cid, cfg in assigned.items()
        if d.clusters[cid].is_leaf and leaf_cut(res, cid, cfg)
    ]
    return plan_from_cuts(res.graph, cuts)


def descend_opt(res: DPResult, cid: int, cfg: Config) -> dict[int, Config]:
    """Pick consistent nonzero child configurations all the way down to the leaves."""
    if not res.tables[cid].get(cfg):
        if not (res.semiring == MINCOST and res.tables[cid].get(cfg) == 0):
            raise AssertionError(f"descend precondition violated at cluster {cid}")
    assigned: dict[int, Config] = {}
    stack = [(cid, cfg)]
    while stack:
        c, k = stack.pop()
        assigned[c] = k
        if res.decomposition.clusters[c].is_leaf:
            continue
        a, b = res.decomposition.clusters[c].children
        for k1, _, k2, _ in consistent_children(res, c, k):
            stack.append((a, k1))
            stack.append((b, k2))
            break
        else:
            raise AssertionError(f"no consistent children under cluster {c}")
    return assigned


def descend_unrank(res: DPResult, cid: int, cfg: Config, p: int) -> dict[int, Config]:
    """Configurations of the ``p``-th solution (1-based) compatible with ``cfg``."""
    if res.semiring != COUNT:
        raise ValueError("unranking needs the count semiring")
    total = res.tables[cid].get(cfg) or 0
    if not 1 <= p <= total:
        raise ValueError(f"rank {p} outside [1, {total}]")
    assigned: dict[int, Config] = {}
    stack = [(cid, cfg, p)]
    while stack:
        c, k, r = stack.pop()
        assigned[c] = k
        if res.decomposition.clusters[c].is_leaf:
            if r != 1:
                raise AssertionError("leaf reached with rank > 1")
            continue
        a, b = res.decomposition.clusters[c].children
        for k1, v1, k2, v2 in consistent_children(res, c, k):
            delta = v1 * v2
            if r <= delta:
                stack.append((a, k1, (r - 1) // v2 + 1))
                stack.append((b, k2, (r - 1) % v2 + 1))
                break
            r -= delta
        else:
            raise AssertionError(f"rank overflow under cluster {c}")
    return assigned


def optimize(res: DPResult) -> tuple[int, Plan]:
    entries = [(cfg, v) for cfg, v in res.root_entries() if v is not None and v is not False]
    if not entries:
        raise NoSolution("no feasible plan")
    if res.semiring == MINCOST:
        cfg, best = min(entries, key=lambda cv: (cv[1], cv[0].finished))
    else:
        cfg, _ = min(entries, key=lambda cv: (cv[0].cost, cv[0].finished))
        best = cfg.cost
    plan = _plan_from_leaves(res, descend_opt(res, res.decomposition.root, cfg))
    return best, plan


def count_plans(res: DPResult, cost: CostFilter = None) -> int:
    if res.semiring != COUNT:
        raise ValueError("counting needs the count semiring")
    return sum(v for _, v in root_configs(res, cost))


def unrank_plan(res: DPResult, p: int, cost: CostFilter = None) -> Plan:
    """The ``p``-th plan (1-based) over all root configurations passing ``cost``."""
    r = p
    for cfg, v in root_configs(res, cost):
        if r <= v:
            plan = _plan_from_leaves(res, descend_unrank(res, res.decomposition.root, cfg, r))
            plan.rank_p = p
            return plan
        r -= v
    raise ValueError(f"rank {p} exceeds the number of plans")


def sample_uniform(res: DPResult, cost: CostFilter = None, seed: int | None = None) -> Plan:
    n = count_plans(res, cost)
    if n == 0:
        raise NoSolution("no plan with the requested cost")
    p = random.Random(seed).randint(1, n)
    plan = unrank_plan(res, p, cost)
    plan.seed = seed
    return plan


BUILDERS: dict[str, Callable[[EmbeddedGraph], SphereCutDecomposition]] = {
    "sweep": sweep_decomposition,
    "radial": radial_bfs_decomposition,
}


@dataclass
class Solver:
    """Preprocess, decompose and run the DP once; answer queries on the original graph.

    Degree-one vertices are merged only where that cannot lose plans, and
    answers are mapped back to the original vertex ids.
    """

    graph: EmbeddedGraph
    spec: ProblemSpec
    semiring: str = COUNT
    mode: str = "auto"
    builder: str = "sweep"
    decomposition: SphereCutDecomposition | None = None
    reduction: Reduction = field(init=False)
    dp: DPResult | None = field(init=False, default=None)

    def __post_init__(self) -> None:
        self.spec.check_total(self.graph.total_weight)
        if self.decomposition is not None:
            self.reduction = Reduction(self.graph, self.graph, {v: v for v in self.graph.weights}, frozenset())
        else:
            self.reduction = preprocess(self.graph, self.spec)
        if self.reduction.trivial:
            return
        d = self.decomposition or BUILDERS[self.builder](self.reduction.graph)
        self.decomposition = d
        self.dp = run_dp(d, self.reduction.graph, self.spec, self.semiring, self.mode)

    def _trivial_plan(self) -> Plan | None:
        g = self.graph
        if self.spec.k == 1 and self.spec.allows(g.total_weight):
            return plan_from_blocks(g, [g.vertices])
        return None

    def restore(self, plan: Plan) -> Plan:
        if self.reduction.graph is self.graph:
            return plan
        owner = self.reduction.owner
        blocks: dict[int, list[int]] = {}
        for v in self.graph.vertices:
            blocks.setdefault(plan.assignment[owner[v]], []).append(v)
        out = plan_from_blocks(self.graph, blocks.values())
        out.seed, out.rank_p = plan.seed, plan.rank_p
        return out

    def optimize(self) -> tuple[int, Plan]:
        if self.dp is None:
            plan = self._trivial_plan()
            if plan is None:
                raise NoSolution("no feasible plan")
            return 0, plan
        cost, plan = optimize(self.dp)
        return cost, self.restore(plan)

    def count(self, cost: CostFilter = None) -> int:
        if self.dp is None:
            return int(self._trivial_plan() is not None and _matches(0, cost))
        return count_plans(self.dp, cost)

    def histogram(self) -> dict[tuple[tuple[int, ...], int], int]:
        """Plan counts keyed by (sorted district weights, cost)."""
        if self.dp is None:
            plan = self._trivial_plan()
            return {((plan.weights[0],), 0): 1} if plan else {}
        out: dict[tuple[tuple[int, ...], int], int] = {}
        for cfg, v in root_configs(self.dp):
            key = (cfg.finished, cfg.cost)
            out[key] = out.get(key, 0) + v
        return out

    def unrank(self, p: int, cost: CostFilter = None) -> Plan:
        if self.dp is None:
            plan = self._trivial_plan()
            if plan is None or p != 1 or not _matches(0, cost):
                raise ValueError(f"rank {p} out of range")
            plan.rank_p = 1
            return plan
        return self.restore(unrank_plan(self.dp, p, cost))

    def sample(self, cost: CostFilter = None, seed: int | None = None) -> Plan:
        if self.dp is None:
            plan = self._trivial_plan()
            if plan is None or not _matches(0, cost):
                raise NoSolution("no plan with the requested cost")
            plan.seed, plan.rank_p = seed, 1
            return plan
        return self.restore(sample_uniform(self.dp, cost, seed))
