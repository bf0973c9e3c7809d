"""Instance generators: grids, the bin-packing gadget and unit-weight expansion."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable

from .graph import EmbeddedGraph, GraphError, ProblemSpec, build_graph, rotation_from_positions
from .solve import Plan, plan_from_blocks

WeightRule = int | Callable[[int, int], int]


def _embedded(
    weights: dict[int, int],
    ends: dict[int, tuple[int, int]],
    costs: dict[int, int],
    positions: dict[int, tuple[float, float]],
    meta: dict | None = None,
) -> EmbeddedGraph:
    rot = rotation_from_positions(positions, ends)
    return build_graph(
        {
            "vertices": [{"id": v, "weight": w} for v, w in weights.items()],
            "edges": [{"id": e, "u": u, "v": v, "cost": costs[e]} for e, (u, v) in ends.items()],
            "rotation": {str(v): list(r) for v, r in rot.items()},
            "meta": meta or {},
        }
    )


def grid(r: int, c: int, weight: WeightRule = 1, cost: WeightRule = 1) -> EmbeddedGraph:
    """r x c grid; vertex (i, j) has id ``i*c + j``.

    ``weight`` is a constant or a function of (i, j); ``cost`` is a constant
    or a function of the two endpoint ids.
    """
    if r < 1 or c < 1 or r * c < 2:
        raise ValueError("grid needs at least two vertices")
    wf = weight if callable(weight) else (lambda i, j: weight)
    cf = cost if callable(cost) else (lambda a, b: cost)
    weights = {i * c + j: wf(i, j) for i in range(r) for j in range(c)}
    pos = {i * c + j: (float(j), float(-i)) for i in range(r) for j in range(c)}
    pairs = [(i * c + j, i * c + j + 1) for i in range(r) for j in range(c - 1)]
    pairs += [(i * c + j, (i + 1) * c + j) for i in range(r - 1) for j in range(c)]
    ends = dict(enumerate(pairs))
    costs = {e: cf(a, b) for e, (a, b) in ends.items()}
    return _embedded(weights, ends, costs, pos)


@dataclass(frozen=True)
class BinPackingInstance:
    """Pack ``values`` into ``k`` bins of capacity ``B``."""

    values: tuple[int, ...]
    k: int
    B: int

    def __post_init__(self) -> None:
        if self.k < 1 or self.B < 1:
            raise ValueError("k and B must be positive")
        if any(v < 1 for v in self.values):
            raise ValueError("values must be positive")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def is_padded(self) -> bool:
        return sum(self.values) == self.k * self.B

    def padded(self) -> "BinPackingInstance":
        """Append unit values until the total is exactly kB."""
        gap = self.k * self.B - sum(self.values)
        if gap < 0:
            raise ValueError(f"values sum to {sum(self.values)} > kB = {self.k * self.B}")
        return BinPackingInstance(self.values + (1,) * gap, self.k, self.B)


def bp_feasible(bp: BinPackingInstance) -> list[list[int]] | None:
    """Brute force: item indices per bin with every bin at most B, or None."""
    for assign in product(range(bp.k), repeat=bp.n):
        loads = [0] * bp.k
        for i, b in enumerate(assign):
            loads[b] += bp.values[i]
        if max(loads) <= bp.B:
            return [[i for i, b in enumerate(assign) if b == j] for j in range(bp.k)]
    return None


@dataclass
class GadgetInstance:
    graph: EmbeddedGraph
    spec: ProblemSpec
    bp: BinPackingInstance
    rows: list[list[int]]  # rows[i-1][j-1] is the vertex id of s_i^j
    scale: int

    def labels(self) -> dict[str, int]:
        return {
            f"s_{i}^{j}": v for i, row in enumerate(self.rows, 1) for j, v in enumerate(row, 1)
        }

    def save(self, graph_path: str | Path, labels_path: str | Path) -> None:
        with open(graph_path, "w") as fh:
            json.dump(self.graph.to_dict(), fh, indent=1)
        with open(labels_path, "w") as fh:
            json.dump(
                {
                    "labels": self.labels(),
                    "rows": self.rows,
                    "scale": self.scale,
                    "values": list(self.bp.values),
                    "k": self.bp.k,
                    "B": self.bp.B,
                    "L": self.spec.L,
                    "U": self.spec.U,
                },
                fh,
                indent=1,
            )


def binpacking_gadget(bp: BinPackingInstance, cost: int = 1) -> GadgetInstance:
    """Planar districting instance that is feasible iff ``bp`` is.

    Row i (1..2n+1) has k vertices when i is odd and k+1 when even.  The
    fractional weights of the interior odd rows are cleared by scaling every
    weight by 2(n-1); each district must then weigh exactly 2(n-1)(T+B).
    """
    if not bp.is_padded:
        raise ValueError("pad the instance first (values must sum to kB)")
    n, k, B = bp.n, bp.k, bp.B
    if n < 2:
        raise ValueError("the gadget needs n >= 2; a single value is decided directly")
    scale = 2 * (n - 1)
    kB = k * B
    rows: list[list[int]] = []
    weights: dict[int, int] = {}
    pos: dict[int, tuple[float, float]] = {}
    nid = 0
    for i in range(1, 2 * n + 2):
        row = []
        for j in range(1, (k if i % 2 else k + 1) + 1):
            if i == 1:
                w = scale * kB**2
            elif i == 2 * n + 1:
                w = scale * kB**4
            elif i % 2:
                w = 1
            else:
                w = scale * bp.values[i // 2 - 1]
            weights[nid] = w
            pos[nid] = (float(2 * j if i % 2 else 2 * j - 1), float(-i))
            row.append(nid)
            nid += 1
        rows.append(row)
    pairs = []
    for i in range(1, 2 * n + 2, 2):
        for j in range(1, k + 1):
            for r in (i - 1, i + 1):
                if 1 <= r <= 2 * n + 1:
                    pairs.append((rows[i - 1][j - 1], rows[r - 1][j - 1]))
                    pairs.append((rows[i - 1][j - 1], rows[r - 1][j]))
    ends = dict(enumerate(pairs))
    g = _embedded(weights, ends, {e: cost for e in ends}, pos)
    target = scale * (kB**2 + kB**4 + kB + B) + (n - 1)
    spec = ProblemSpec(k, target, target + 1, sum(g.costs.values()) + 1)
    return GadgetInstance(g, spec, bp, rows, scale)


class GadgetViolation(ValueError):
    """A plan breaks the structure every valid gadget solution must have."""


def plan_to_bins(gi: GadgetInstance, plan: Plan) -> list[list[int]]:
    """Item indices per district: item i goes to the district holding two vertices of row 2i."""
    k, n = gi.bp.k, gi.bp.n
    last = len(gi.rows)
    for i in (1, last):
        got = sorted(plan.assignment[v] for v in gi.rows[i - 1])
        if got != list(range(1, k + 1)):
            raise GadgetViolation(f"row {i} does not meet every district exactly once")
    bins: list[list[int]] = [[] for _ in range(k)]
    for item in range(n):
        seen: dict[int, int] = {}
        for v in gi.rows[2 * item + 1]:
            d = plan.assignment[v]
            seen[d] = seen.get(d, 0) + 1
        doubles = [d for d, c in seen.items() if c == 2]
        if len(seen) != k or len(doubles) != 1:
            raise GadgetViolation(f"row {2 * item + 2} is not split one-per-district plus one pair")
        bins[doubles[0] - 1].append(item)
    for j, b in enumerate(bins, 1):
        s = sum(gi.bp.values[i] for i in b)
        if s != gi.bp.B:
            raise GadgetViolation(f"bin {j} sums to {s}, expected {gi.bp.B}")
    return bins


def bins_to_plan(gi: GadgetInstance, bins: list[list[int]]) -> Plan:
    """The standard plan for a bin solution: column j of odd rows forms district j."""
    k = gi.bp.k
    home = {i: u for u, b in enumerate(bins, 1) for i in b}
    blocks: list[list[int]] = [[] for _ in range(k)]
    for i, row in enumerate(gi.rows, 1):
        if i % 2:
            for j, v in enumerate(row):
                blocks[j].append(v)
        else:
            u = home[i // 2 - 1]
            for j, v in enumerate(row, 1):
                blocks[(j if j <= u else j - 1) - 1].append(v)
    return plan_from_blocks(gi.graph, blocks)


@dataclass
class Expansion:
    graph: EmbeddedGraph
    parent: dict[int, int] = field(default_factory=dict)  # dummy id -> original vertex


def expand_unit_weights(g: EmbeddedGraph, cap: int = 10_000, cost: int = 1) -> Expansion:
    """Replace each weight w by w-1 pendant unit dummies attached to the vertex.

    Dummies are inserted into the rotation right after the vertex's first
    incident edge, so the embedding stays planar.
    """
    if any(w < 1 for w in g.weights.values()):
        raise GraphError("every weight must be at least 1")
    if g.total_weight > cap:
        raise ValueError(f"expanded graph would have {g.total_weight} > {cap} vertices")
    weights = {v: 1 for v in g.weights}
    ends = dict(g.ends)
    costs = dict(g.costs)
    rotation = {v: list(r) for v, r in g.rotation.items()}
    parent: dict[int, int] = {}
    nv = max(g.weights) + 1
    ne = max(g.ends, default=-1) + 1
    for v in g.vertices:
        for _ in range(g.weights[v] - 1):
            weights[nv] = 1
            ends[ne] = (v, nv)
            costs[ne] = cost
            rotation[v].insert(1 if rotation[v] else 0, ne)
            rotation[nv] = [ne]
            parent[nv] = v
            nv += 1
            ne += 1
    out = build_graph(
        {
            "vertices": [{"id": v, "weight": w} for v, w in weights.items()],
            "edges": [{"id": e, "u": a, "v": b, "cost": costs[e]} for e, (a, b) in ends.items()],
            "rotation": {str(v): r for v, r in rotation.items()},
        }
    )
    return Expansion(out, parent)
