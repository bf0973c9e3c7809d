"""Branch decompositions of plane graphs and their sphere-cut certificates.

Two builders are provided.  ``sweep_decomposition`` makes a caterpillar from
a face-connected edge order.  ``radial_bfs_decomposition`` uses a BFS tree of
the radial graph: the non-tree radial edges form a spanning tree of the
graph's edges (tree-cotree duality), and every subtree of it is enclosed by a
fundamental cycle made of two BFS paths, so its boundary holds at most
``eccentricity`` vertices.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .graph import EmbeddedGraph


class DecompositionError(ValueError):
    def __init__(self, message: str, violations: list[str] | None = None) -> None:
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class Cluster:
    id: int
    edges: frozenset[int]
    children: tuple[int, int] | None
    boundary: frozenset[int]
    theta: tuple[int, ...] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass(frozen=True)
class SphereCutDecomposition:
    clusters: dict[int, Cluster]
    root: int
    width: int

    def postorder(self) -> list[int]:
        out: list[int] = []
        stack = [(self.root, False)]
        while stack:
            cid, done = stack.pop()
            c = self.clusters[cid]
            if done or c.is_leaf:
                out.append(cid)
                continue
            stack.append((cid, True))
            stack.append((c.children[1], False))
            stack.append((c.children[0], False))
        return out

    def certified_fraction(self) -> float:
        return sum(c.theta is not None for c in self.clusters.values()) / len(self.clusters)


def boundary_of(g: EmbeddedGraph, edges: frozenset[int] | set[int]) -> frozenset[int]:
    inside: dict[int, int] = {}
    for e in edges:
        for v in g.ends[e]:
            inside[v] = inside.get(v, 0) + 1
    return frozenset(v for v, n in inside.items() if n < g.degree(v))


class _Builder:
    def __init__(self, g: EmbeddedGraph) -> None:
        self.g = g
        self.clusters: dict[int, Cluster] = {}

    def leaf(self, e: int) -> int:
        cid = len(self.clusters)
        s = frozenset([e])
        self.clusters[cid] = Cluster(cid, s, None, boundary_of(self.g, s))
        return cid

    def merge(self, a: int, b: int) -> int:
        cid = len(self.clusters)
        s = self.clusters[a].edges | self.clusters[b].edges
        self.clusters[cid] = Cluster(cid, s, (a, b), boundary_of(self.g, s))
        return cid

    def finish(self, root: int) -> SphereCutDecomposition:
        width = max(len(c.boundary) for c in self.clusters.values())
        return SphereCutDecomposition(dict(self.clusters), root, width)


def caterpillar(g: EmbeddedGraph, order: list[int]) -> SphereCutDecomposition:
    """Left-deep decomposition whose i-th internal cluster holds the first i+1 edges of ``order``."""
    if sorted(order) != g.edges or not order:
        raise DecompositionError("edge order must list every edge once")
    b = _Builder(g)
    acc = b.leaf(order[0])
    for e in order[1:]:
        acc = b.merge(acc, b.leaf(e))
    return b.finish(acc)


def _prefix_width(g: EmbeddedGraph, order: list[int]) -> int:
    inside: dict[int, int] = {}
    bd: set[int] = set()
    width = 0
    for e in order:
        for v in g.ends[e]:
            inside[v] = inside.get(v, 0) + 1
            if inside[v] == g.degree(v):
                bd.discard(v)
            else:
                bd.add(v)
        width = max(width, len(bd))
    return width


def _dual_dfs_order(g: EmbeddedGraph, start: int, reverse: bool) -> list[int]:
    outer = g.outer_face
    nbrs: dict[int, list[tuple[int, int]]] = {f: [] for f in range(len(g.faces))}
    for e in g.edges:
        u, v = g.ends[e]
        f1, f2 = g.face_of_dart[(e, u)], g.face_of_dart[(e, v)]
        if f1 != f2 and outer not in (f1, f2):
            nbrs[f1].append((e, f2))
            nbrs[f2].append((e, f1))
    for f in nbrs:
        nbrs[f].sort(reverse=reverse)

    order: list[int] = []
    placed: set[int] = set()
    visited: set[int] = set()

    def visit(f0: int) -> None:
        stack = [f0]
        while stack:
            f = stack.pop()
            if f in visited:
                continue
            visited.add(f)
            for e, _ in g.faces[f]:
                if e not in placed:
                    placed.add(e)
                    order.append(e)
            # push in reverse so the preferred neighbour is explored first
            for _, h in reversed(nbrs[f]):
                if h not in visited:
                    stack.append(h)

    inner = [f for f in range(len(g.faces)) if f != outer]
    for f in ([start] if start >= 0 else []) + inner:
        if f not in visited:
            visit(f)
    if len(order) < len(g.ends):
        # edges that touch only the outer face (bridges): primal DFS order
        seen = set()
        stack = [g.vertices[0]]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            for e in sorted(g.rotation[v], reverse=True):
                if e not in placed:
                    placed.add(e)
                    order.append(e)
                stack.append(g.other(e, v))
    return order


def sweep_decomposition(g: EmbeddedGraph, max_starts: int = 64) -> SphereCutDecomposition:
    """Caterpillar over a face-by-face depth-first sweep of the inner dual.

    Several start faces and both neighbour preferences are tried; the
    narrowest order wins (first found on ties).
    """
    if not g.ends:
        raise DecompositionError("graph has no edges")
    outer = g.outer_face
    inner = [f for f in range(len(g.faces)) if f != outer]
    if len(inner) > max_starts:
        touching = sorted({g.face_of_dart[(e, t)] for e, t in g.faces[outer]} - {outer})
        starts = (touching + inner)[:max_starts]
    else:
        starts = inner
    best: list[int] | None = None
    best_w = None
    for start in starts or [outer]:
        for reverse in (False, True):
            order = _dual_dfs_order(g, start, reverse) if inner else _dual_dfs_order(g, -1, reverse)
            w = _prefix_width(g, order)
            if best_w is None or w < best_w:
                best, best_w = order, w
    return certify_theta(caterpillar(g, best), g)


def radial_bfs_decomposition(
    g: EmbeddedGraph, root: tuple[str, int] | None = None
) -> SphereCutDecomposition:
    """Tree-cotree decomposition from a BFS of the radial graph rooted at ``root``.

    ``root`` is ``("f", face)`` or ``("v", vertex)``; default is the outer face.
    """
    if not g.ends:
        raise DecompositionError("graph has no edges")
    if root is None:
        root = ("f", g.outer_face)
    # radial multigraph: one edge per corner (v, i)
    adj: dict[tuple[str, int], list[tuple[tuple[int, int], tuple[str, int]]]] = {}
    for v in g.vertices:
        for i in range(g.degree(v)):
            f = g.corner_face(v, i)
            adj.setdefault(("v", v), []).append(((v, i), ("f", f)))
            adj.setdefault(("f", f), []).append(((v, i), ("v", v)))
    if root not in adj:
        raise DecompositionError(f"{root} is not a radial node")
    tree_corners: set[tuple[int, int]] = set()
    seen = {root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for corner, y in adj[x]:
            if y not in seen:
                seen.add(y)
                tree_corners.add(corner)
                queue.append(y)

    # non-tree corners join the two edges meeting at that corner
    cotree: dict[int, list[int]] = {e: [] for e in g.edges}
    links = 0
    for v in g.vertices:
        rot = g.rotation[v]
        for i in range(len(rot)):
            if (v, i) in tree_corners:
                continue
            a, b = rot[i], rot[(i + 1) % len(rot)]
            if a == b:
                continue
            cotree[a].append(b)
            cotree[b].append(a)
            links += 1
    if links != len(g.ends) - 1:
        raise DecompositionError("radial cotree is not a spanning tree; embedding is inconsistent")

    top = min(g.edges)
    parent = {top: None}
    children: dict[int, list[int]] = {e: [] for e in g.edges}
    stack = [top]
    visit_order = []
    while stack:
        e = stack.pop()
        visit_order.append(e)
        for h in sorted(cotree[e]):
            if h not in parent:
                parent[h] = e
                children[e].append(h)
                stack.append(h)
    if len(parent) != len(g.ends):
        raise DecompositionError("radial cotree is disconnected")

    b = _Builder(g)
    subtree: dict[int, int] = {}
    for e in reversed(visit_order):
        kids = sorted(children[e])
        acc = None
        for h in kids:
            acc = subtree[h] if acc is None else b.merge(acc, subtree[h])
        leaf = b.leaf(e)
        subtree[e] = leaf if acc is None else b.merge(acc, leaf)
    return certify_theta(b.finish(subtree[top]), g)


def noose_order(g: EmbeddedGraph, edges: frozenset[int], boundary: frozenset[int]) -> tuple[int, ...] | None:
    """Cyclic order of ``boundary`` along a single closed curve separating ``edges`` from the rest.

    Returns ``None`` when no such single noose exists (a boundary vertex or a
    face is entered more than once, or the curve falls into several loops).
    """
    if len(boundary) <= 3:
        return tuple(sorted(boundary))
    # transition corners: (v, i) with exactly one of rot[i], rot[i+1] in the cluster
    at_vertex: dict[int, list[tuple[int, int]]] = {}
    in_face: dict[int, list[tuple[int, int]]] = {}
    for v in boundary:
        rot = g.rotation[v]
        d = len(rot)
        corners = [(v, i) for i in range(d) if (rot[i] in edges) != (rot[(i + 1) % d] in edges)]
        if len(corners) != 2:
            return None
        at_vertex[v] = corners
        for c in corners:
            in_face.setdefault(g.corner_face(*c), []).append(c)
    if any(len(cs) != 2 for cs in in_face.values()):
        return None
    via_face = {}
    for a, b in in_face.values():
        via_face[a], via_face[b] = b, a
    start = min(boundary)
    order = [start]
    corner = at_vertex[start][1]
    while True:
        nxt = via_face[corner]
        v = nxt[0]
        if v == start:
            break
        if v in order:
            return None
        order.append(v)
        c1, c2 = at_vertex[v]
        corner = c2 if nxt == c1 else c1
    if len(order) != len(boundary):
        return None
    return tuple(order)


def certify_theta(d: SphereCutDecomposition, g: EmbeddedGraph) -> SphereCutDecomposition:
    clusters = {
        cid: replace(c, theta=noose_order(g, c.edges, c.boundary)) for cid, c in d.clusters.items()
    }
    return SphereCutDecomposition(clusters, d.root, d.width)


def validate(d: SphereCutDecomposition, g: EmbeddedGraph) -> list[str]:
    """All violated decomposition invariants (empty list means valid)."""
    problems: list[str] = []
    if d.root not in d.clusters:
        return [f"root {d.root} missing"]
    leaves: dict[int, int] = {}
    seen: set[int] = set()
    stack = [d.root]
    while stack:
        cid = stack.pop()
        if cid in seen:
            problems.append(f"cluster {cid}: reached twice (not a tree)")
            continue
        seen.add(cid)
        c = d.clusters[cid]
        if c.id != cid:
            problems.append(f"cluster {cid}: id mismatch")
        if c.is_leaf:
            if len(c.edges) != 1:
                problems.append(f"cluster {cid}: leaf bijection (leaf holds {len(c.edges)} edges)")
            for e in c.edges:
                if e in leaves:
                    problems.append(f"leaf bijection: edge {e} in leaves {leaves[e]} and {cid}")
                leaves[e] = cid
        else:
            if len(c.children) != 2:
                problems.append(f"cluster {cid}: not binary")
                continue
            a, b = (d.clusters.get(x) for x in c.children)
            if a is None or b is None:
                problems.append(f"cluster {cid}: missing child")
                continue
            if a.edges & b.edges or (a.edges | b.edges) != c.edges:
                problems.append(f"cluster {cid}: disjoint union violated")
            stack.extend(c.children)
        if not c.edges <= set(g.ends):
            problems.append(f"cluster {cid}: unknown edges")
            continue
        if c.boundary != boundary_of(g, c.edges):
            problems.append(f"cluster {cid}: boundary mismatch")
        if c.theta is not None and (sorted(c.theta) != sorted(c.boundary) or len(set(c.theta)) != len(c.theta)):
            problems.append(f"cluster {cid}: theta does not list the boundary")
    missing = set(g.ends) - set(leaves)
    if missing:
        problems.append(f"leaf bijection: edges {sorted(missing)} have no leaf")
    if d.clusters[d.root].edges != frozenset(g.ends):
        problems.append("root does not hold every edge")
    unreachable = set(d.clusters) - seen
    if unreachable:
        problems.append(f"clusters {sorted(unreachable)} unreachable from root")
    width = max((len(d.clusters[c].boundary) for c in seen), default=0)
    if width != d.width:
        problems.append(f"width mismatch: stored {d.width}, measured {width}")
    return problems


def export_decomposition(d: SphereCutDecomposition) -> dict[str, Any]:
    nodes = []
    for cid in sorted(d.clusters):
        c = d.clusters[cid]
        node: dict[str, Any] = {
            "id": cid,
            "children": list(c.children) if c.children else None,
        }
        if c.is_leaf:
            node["edges"] = sorted(c.edges)
        if c.theta is not None:
            node["theta"] = list(c.theta)
        nodes.append(node)
    return {"nodes": nodes, "root": d.root, "width": d.width}


def import_decomposition(
    data: dict[str, Any] | str | Path, g: EmbeddedGraph, recertify: bool = True
) -> SphereCutDecomposition:
    """Parse the interchange format, rebuild edge sets and boundaries, and validate."""
    if not isinstance(data, dict):
        with open(data) as fh:
            data = json.load(fh)
    try:
        raw_nodes = {int(n["id"]): n for n in data["nodes"]}
        root = int(data["root"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DecompositionError(f"malformed decomposition: {exc}") from exc
    if root not in raw_nodes:
        raise DecompositionError(f"root {root} is not a node")
    edges: dict[int, frozenset[int]] = {}

    def edge_set(cid: int, depth: int = 0) -> frozenset[int]:
        if cid in edges:
            return edges[cid]
        if cid not in raw_nodes:
            raise DecompositionError(f"unknown node {cid}")
        if depth > len(raw_nodes):
            raise DecompositionError("cycle in decomposition tree")
        n = raw_nodes[cid]
        kids = n.get("children")
        if kids:
            if len(kids) != 2:
                raise DecompositionError(f"node {cid} is not binary")
            s = edge_set(int(kids[0]), depth + 1) | edge_set(int(kids[1]), depth + 1)
        else:
            s = frozenset(int(e) for e in n.get("edges", []))
        edges[cid] = s
        return s

    clusters = {}
    for cid, n in raw_nodes.items():
        s = edge_set(cid)
        kids = n.get("children")
        theta = tuple(n["theta"]) if n.get("theta") is not None else None
        clusters[cid] = Cluster(
            cid,
            s,
            (int(kids[0]), int(kids[1])) if kids else None,
            boundary_of(g, s & set(g.ends)),
            theta,
        )
    width = max(len(c.boundary) for c in clusters.values())
    d = SphereCutDecomposition(clusters, root, width)
    problems = validate(d, g)
    if problems:
        raise DecompositionError("; ".join(problems), problems)
    if recertify:
        d = certify_theta(d, g)
    return d
