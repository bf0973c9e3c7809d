"""Planar embedded graphs with vertex weights and edge costs.

An embedding is given combinatorially: every vertex lists its incident
edge ids in cyclic order (a rotation system).  Faces are traced from the
rotation, and the embedding is accepted only if Euler's formula holds.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable

MAX_ID = 2**32 - 1

# A dart is an edge traversed away from ``tail``.
Dart = tuple[int, int]


class GraphError(ValueError):
    """Raised when a graph description is malformed or not planar."""


class InfeasibleSpec(ValueError):
    """Raised when a problem spec can be rejected without search."""


@dataclass(frozen=True)
class ProblemSpec:
    """District count ``k``, part-weight interval ``[L, U)`` and exclusive cost bound ``S``."""

    k: int
    L: int
    U: int
    S: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.L < 0 or self.U <= self.L:
            raise ValueError(f"need 0 <= L < U, got [{self.L}, {self.U})")
        if self.S < 1:
            raise ValueError("S must be positive")

    def check_total(self, total: int) -> None:
        # k*L <= total < k*U, otherwise no plan can exist
        if not (self.k * self.L <= total <= self.k * (self.U - 1)):
            raise InfeasibleSpec(
                f"total weight {total} cannot be split into {self.k} parts in [{self.L}, {self.U})"
            )

    def allows(self, weight: int) -> bool:
        return self.L <= weight < self.U


@dataclass(frozen=True, eq=False)
class EmbeddedGraph:
    """Connected plane multigraph.

    ``weights`` maps vertex id to weight, ``ends`` maps edge id to its
    endpoints ``(u, v)``, ``costs`` maps edge id to cost and ``rotation``
    maps each vertex to the cyclic order of its incident edge ids.
    """

    weights: dict[int, int]
    ends: dict[int, tuple[int, int]]
    costs: dict[int, int]
    rotation: dict[int, tuple[int, ...]]
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def vertices(self) -> list[int]:
        return sorted(self.weights)

    @property
    def edges(self) -> list[int]:
        return sorted(self.ends)

    @property
    def total_weight(self) -> int:
        return sum(self.weights.values())

    @property
    def total_cost(self) -> int:
        return sum(self.costs.values())

    def degree(self, v: int) -> int:
        return len(self.rotation[v])

    def other(self, e: int, v: int) -> int:
        a, b = self.ends[e]
        return b if v == a else a

    def neighbors(self, v: int) -> list[int]:
        return [self.other(e, v) for e in self.rotation[v]]

    @cached_property
    def _rot_index(self) -> dict[int, dict[int, int]]:
        return {v: {e: i for i, e in enumerate(rot)} for v, rot in self.rotation.items()}

    def next_dart(self, dart: Dart) -> Dart:
        """Dart following ``dart`` along its face: turn to the next edge in the head's rotation."""
        e, tail = dart
        head = self.other(e, tail)
        rot = self.rotation[head]
        i = self._rot_index[head][e]
        return rot[(i + 1) % len(rot)], head

    @cached_property
    def faces(self) -> list[list[Dart]]:
        """Face boundary walks as lists of darts; each dart appears in exactly one walk."""
        if not self.ends:
            return [[]]
        seen: set[Dart] = set()
        out: list[list[Dart]] = []
        for e in self.edges:
            for tail in self.ends[e]:
                start = (e, tail)
                if start in seen:
                    continue
                walk = []
                d = start
                while d not in seen:
                    seen.add(d)
                    walk.append(d)
                    d = self.next_dart(d)
                out.append(walk)
        return out

    @cached_property
    def face_of_dart(self) -> dict[Dart, int]:
        return {d: i for i, walk in enumerate(self.faces) for d in walk}

    def corner_face(self, v: int, i: int) -> int:
        """Face containing the corner at ``v`` between rotation slots ``i`` and ``i + 1``."""
        e = self.rotation[v][i]
        # arriving at v along e and leaving along rot[i+1] turns through this corner
        return self.face_of_dart[(e, self.other(e, v))]

    def face_vertices(self, f: int) -> list[int]:
        return [tail for _, tail in self.faces[f]]

    @cached_property
    def outer_face(self) -> int:
        """Longest face walk (lowest index on ties), used as the default outer face."""
        if "outer_face" in self.meta:
            return int(self.meta["outer_face"])
        return max(range(len(self.faces)), key=lambda f: (len(self.faces[f]), -f))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "vertices": [{"id": v, "weight": self.weights[v]} for v in self.vertices],
            "edges": [
                {"id": e, "u": self.ends[e][0], "v": self.ends[e][1], "cost": self.costs[e]}
                for e in self.edges
            ],
            "rotation": {str(v): list(self.rotation[v]) for v in self.vertices},
        }
        if self.meta:
            out["meta"] = self.meta
        return out


def _as_id(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or not (0 <= x <= MAX_ID):
        raise GraphError(f"{what} must be a 32-bit nonnegative integer, got {x!r}")
    return x


def _as_nonneg(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise GraphError(f"{what} must be a nonnegative integer, got {x!r}")
    return x


def build_graph(raw: dict[str, Any]) -> EmbeddedGraph:
    """Validate a raw graph description and return an :class:`EmbeddedGraph`.

    Raises :class:`GraphError` on duplicate ids, dangling endpoints, self-loops,
    inconsistent rotations, disconnection or a rotation that fails Euler's formula.
    """
    try:
        raw_vertices = raw["vertices"]
        raw_edges = raw.get("edges", [])
        raw_rotation = raw.get("rotation", {})
    except (KeyError, TypeError, AttributeError) as exc:
        raise GraphError(f"malformed graph description: {exc}") from exc

    weights: dict[int, int] = {}
    for item in raw_vertices:
        v = _as_id(item["id"], "vertex id")
        if v in weights:
            raise GraphError(f"duplicate vertex id {v}")
        weights[v] = _as_nonneg(item.get("weight", 1), f"weight of vertex {v}")
    if not weights:
        raise GraphError("graph has no vertices")

    ends: dict[int, tuple[int, int]] = {}
    costs: dict[int, int] = {}
    incident: dict[int, list[int]] = {v: [] for v in weights}
    for item in raw_edges:
        e = _as_id(item["id"], "edge id")
        if e in ends:
            raise GraphError(f"duplicate edge id {e}")
        u, v = _as_id(item["u"], "endpoint"), _as_id(item["v"], "endpoint")
        if u not in weights or v not in weights:
            raise GraphError(f"edge {e} has an unknown endpoint")
        if u == v:
            raise GraphError(f"edge {e} is a self-loop")
        ends[e] = (u, v)
        costs[e] = _as_nonneg(item.get("cost", 1), f"cost of edge {e}")
        incident[u].append(e)
        incident[v].append(e)

    rotation: dict[int, tuple[int, ...]] = {}
    rot_in = {int(k): list(val) for k, val in raw_rotation.items()}
    for v in weights:
        rot = tuple(rot_in.get(v, []))
        if sorted(rot) != sorted(incident[v]):
            raise GraphError(f"rotation of vertex {v} must list each incident edge exactly once")
        rotation[v] = rot
    extra = set(rot_in) - set(weights)
    if extra:
        raise GraphError(f"rotation given for unknown vertices {sorted(extra)}")

    g = EmbeddedGraph(weights, ends, costs, rotation, dict(raw.get("meta", {})))
    if not is_connected(g):
        raise GraphError("graph is disconnected")
    nf = len(g.faces)
    if len(weights) - len(ends) + nf != 2:
        raise GraphError(
            f"rotation is not planar: V - E + F = {len(weights)} - {len(ends)} + {nf} != 2"
        )
    return g


def is_connected(g: EmbeddedGraph, vertices: Iterable[int] | None = None) -> bool:
    """Whether ``vertices`` (default: all) induce a connected subgraph of ``g``."""
    allowed = set(g.weights if vertices is None else vertices)
    if not allowed:
        return False
    start = next(iter(allowed))
    seen = {start}
    todo = [start]
    while todo:
        v = todo.pop()
        for w in g.neighbors(v):
            if w in allowed and w not in seen:
                seen.add(w)
                todo.append(w)
    return seen == allowed


def load_graph(path: str | Path) -> EmbeddedGraph:
    with open(path) as fh:
        return build_graph(json.load(fh))


def save_graph(g: EmbeddedGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_dict(), fh, indent=1)


def rotation_from_positions(
    positions: dict[int, tuple[float, float]], ends: dict[int, tuple[int, int]]
) -> dict[int, tuple[int, ...]]:
    """Counterclockwise rotation system of a straight-line drawing."""
    rot: dict[int, list[tuple[float, int]]] = {v: [] for v in positions}
    for e, (u, v) in ends.items():
        for a, b in ((u, v), (v, u)):
            (xa, ya), (xb, yb) = positions[a], positions[b]
            rot[a].append((math.atan2(yb - ya, xb - xa), e))
    return {v: tuple(e for _, e in sorted(lst)) for v, lst in rot.items()}


@dataclass(frozen=True)
class RadialGraph:
    """Vertex/face incidence graph.  Nodes are ``("v", id)`` or ``("f", index)``."""

    nodes: tuple[tuple[str, int], ...]
    edges: frozenset[tuple[int, int]]  # (vertex id, face index)

    def adjacency(self) -> dict[tuple[str, int], list[tuple[str, int]]]:
        adj: dict[tuple[str, int], list[tuple[str, int]]] = {n: [] for n in self.nodes}
        for v, f in sorted(self.edges):
            adj[("v", v)].append(("f", f))
            adj[("f", f)].append(("v", v))
        return adj

    def distances(self, root: tuple[str, int]) -> dict[tuple[str, int], int]:
        adj = self.adjacency()
        if root not in adj:
            raise KeyError(f"{root} is not a radial node")
        dist = {root: 0}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    def eccentricity(self, root: tuple[str, int]) -> int:
        return max(self.distances(root).values())


def radial_graph(g: EmbeddedGraph) -> RadialGraph:
    pairs = {(tail, f) for f, walk in enumerate(g.faces) for _, tail in walk}
    if not g.ends:
        pairs = {(v, 0) for v in g.weights}
    nodes = tuple([("v", v) for v in g.vertices] + [("f", f) for f in range(len(g.faces))])
    return RadialGraph(nodes, frozenset(pairs))


def dual_graph(g: EmbeddedGraph) -> EmbeddedGraph:
    """Planar dual: one vertex per face, one edge per primal edge (weights 1, costs copied)."""
    ends: dict[int, tuple[int, int]] = {}
    rotation: dict[int, list[int]] = {f: [] for f in range(len(g.faces))}
    for e in g.edges:
        u, _ = g.ends[e]
        ends[e] = (g.face_of_dart[(e, u)], g.face_of_dart[(e, g.other(e, u))])
    for f, walk in enumerate(g.faces):
        rotation[f] = [e for e, _ in walk]
    # self-loops (bridges) are legal in a dual, so bypass build_graph's checks
    return EmbeddedGraph(
        {f: 1 for f in rotation}, ends, dict(g.costs), {f: tuple(r) for f, r in rotation.items()}
    )


@dataclass(frozen=True)
class Reduction:
    """Result of :func:`preprocess`.

    ``owner`` maps every original vertex to the surviving vertex it was merged
    into; ``forced_uncut`` lists the removed edges (never cut in a restored plan).
    """

    graph: EmbeddedGraph
    original: EmbeddedGraph
    owner: dict[int, int]
    forced_uncut: frozenset[int]

    @property
    def trivial(self) -> bool:
        return len(self.graph.weights) == 1


def preprocess(g: EmbeddedGraph, spec: ProblemSpec | None = None) -> Reduction:
    """Repeatedly merge degree-one vertices into their neighbour.

    Without ``spec`` every pendant vertex is merged.  With ``spec`` a pendant
    (possibly already merged) vertex is kept when its weight alone could form
    a district, because merging would then drop plans.
    """

    def safe(weight: int) -> bool:
        return spec is None or spec.k == 1 or not spec.allows(weight)

    weights = dict(g.weights)
    rotation = {v: list(r) for v, r in g.rotation.items()}
    owner = {v: v for v in g.weights}
    removed: set[int] = set()
    queue = deque(v for v in g.vertices if len(rotation[v]) == 1)
    while queue:
        x = queue.popleft()
        if x not in rotation or len(rotation[x]) != 1 or len(rotation) == 1:
            continue
        if not safe(weights[x]):
            continue
        (e,) = rotation[x]
        y = g.other(e, x)
        rotation[y].remove(e)
        weights[y] += weights.pop(x)
        del rotation[x]
        removed.add(e)
        for v, o in owner.items():
            if o == x:
                owner[v] = y
        if len(rotation[y]) == 1:
            queue.append(y)
    if not removed:
        return Reduction(g, g, owner, frozenset())
    ends = {e: uv for e, uv in g.ends.items() if e not in removed}
    costs = {e: c for e, c in g.costs.items() if e not in removed}
    reduced = EmbeddedGraph(
        weights, ends, costs, {v: tuple(r) for v, r in rotation.items()}, dict(g.meta)
    )
    reduced.meta.pop("outer_face", None)
    return Reduction(reduced, g, owner, frozenset(removed))


def coarsen_weights(g: EmbeddedGraph, divisor: int) -> EmbeddedGraph:
    """Replace each weight ``p`` by ``ceil(p / divisor)``."""
    if divisor < 1:
        raise ValueError("divisor must be >= 1")
    weights = {v: -(-p // divisor) for v, p in g.weights.items()}
    return EmbeddedGraph(weights, dict(g.ends), dict(g.costs), dict(g.rotation), dict(g.meta))
