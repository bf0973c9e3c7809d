"""Configuration tables over a branch decomposition.

Each cluster ``C`` gets a table indexed by ``(pi_in, pi_out)`` (partitions of
the boundary, stored as RGS tuples over the id-sorted boundary) and then by a
weight/cost key.  The weight part is split into

* ``active``: one weight per block of ``pi_in v pi_out``, in representative
  order (blocks sorted by their smallest vertex id), and
* ``finished``: the sorted weights of districts that no longer touch the
  boundary.  A district is finished the moment its block loses every
  boundary vertex, and its weight must then lie in ``[L, U)``.

The inside partition ``rho_in`` behind an entry is the set of components of
the uncut edges of ``C``.  A cut edge must separate its endpoints even after
joining with ``pi_out``; this makes ``rho_in`` unique per plan, so the count
semiring counts plans (unlabelled set partitions) exactly once.

Three semirings share the code: ``count`` (big integers), ``feasibility``
(booleans) and ``mincost`` (cost leaves the key and becomes the value).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .decomp import Cluster, SphereCutDecomposition
from .graph import EmbeddedGraph, ProblemSpec
from .ncp import canonical_rgs, encode, enumerate_all, enumerate_noncrossing, BoundaryPartition

COUNT = "count"
FEASIBILITY = "feasibility"
MINCOST = "mincost"
SEMIRINGS = (COUNT, FEASIBILITY, MINCOST)
MODES = ("auto", "noncrossing", "general")

RGS = tuple[int, ...]


class Config(NamedTuple):
    """One table index.  ``cost`` is ``None`` in the mincost semiring, where cost is the value."""

    pin: RGS
    pout: RGS
    active: tuple[int, ...]
    finished: tuple[int, ...]
    cost: int | None

    @property
    def topo(self) -> tuple[RGS, RGS]:
        return self.pin, self.pout

    @property
    def wkey(self) -> tuple:
        if self.cost is None:
            return self.active, self.finished
        return self.active, self.finished, self.cost


def _config(topo: tuple[RGS, RGS], wkey: tuple) -> Config:
    if len(wkey) == 2:
        return Config(topo[0], topo[1], wkey[0], wkey[1], None)
    return Config(topo[0], topo[1], *wkey)


@dataclass
class ClusterTable:
    cluster_id: int
    semiring: str
    ground: tuple[int, ...]
    groups: dict[tuple[RGS, RGS], dict[tuple, object]] = field(default_factory=dict)

    def get(self, cfg: Config):
        return self.groups.get(cfg.topo, {}).get(cfg.wkey)

    def __len__(self) -> int:
        return sum(len(g) for g in self.groups.values())

    def items(self) -> Iterator[tuple[Config, object]]:
        for topo in sorted(self.groups):
            grp = self.groups[topo]
            for wk in sorted(grp):
                yield _config(topo, wk), grp[wk]

    def by_pin(self) -> dict[RGS, dict[RGS, dict[tuple, object]]]:
        out: dict[RGS, dict[RGS, dict[tuple, object]]] = {}
        for (pin, pout), grp in self.groups.items():
            out.setdefault(pin, {})[pout] = grp
        return out

    def dump(self) -> str:
        """One line per entry: pi_in, pi_out, active|finished weights, cost, value."""
        lines = []
        for cfg, val in self.items():
            w = ",".join(map(str, cfg.active)) + "|" + ",".join(map(str, cfg.finished))
            cost = val if cfg.cost is None else cfg.cost
            shown = 1 if self.semiring == MINCOST else (int(val) if self.semiring == FEASIBILITY else val)
            lines.append(
                f"{encode(BoundaryPartition(self.ground, cfg.pin))}\t"
                f"{encode(BoundaryPartition(self.ground, cfg.pout))}\t{w}\t{cost}\t{shown}"
            )
        return "\n".join(lines)


def _add(out: dict, key: tuple, val, semiring: str) -> None:
    old = out.get(key)
    if old is None:
        out[key] = val
    elif semiring == COUNT:
        out[key] = old + val
    elif semiring == MINCOST:
        if val < old:
            out[key] = val
    # feasibility: already True


def assign_homes(g: EmbeddedGraph) -> dict[int, int]:
    """Each vertex's weight is charged to its smallest incident edge id."""
    return {v: min(g.rotation[v]) for v in g.vertices if g.rotation[v]}


def _labels(n: int, pairs) -> list[int]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return [find(i) for i in range(n)]


def _pairs(rgs: RGS, pos: list[int]):
    first: dict[int, int] = {}
    for b, p in zip(rgs, pos):
        if b in first:
            yield first[b], p
        else:
            first[b] = p


def leaf_entries(
    g: EmbeddedGraph,
    cluster: Cluster,
    spec: ProblemSpec,
    homes: dict[int, int],
    semiring: str,
    pouts: list[RGS],
) -> Iterator[tuple[bool, Config, object]]:
    """Leaf configurations with the ``rho_in`` choice behind them (``True`` = edge cut)."""
    (e,) = cluster.edges
    u, v = g.ends[e]
    ground = tuple(sorted(cluster.boundary))
    verts = [u, v]
    hw = [g.weights[x] if homes.get(x) == e else 0 for x in verts]
    for cut in (False, True):
        cost = g.costs[e] if cut else 0
        if cost >= spec.S:
            continue
        rho = [0, 1] if cut else [0, 0]
        pin = canonical_rgs([rho[verts.index(x)] for x in ground])
        for pout in pouts:
            # node ids: 0, 1 for u, v
            pairs = [] if cut else [(0, 1)]
            pairs += list(_pairs(pout, [verts.index(x) for x in ground]))
            lab = _labels(2, pairs)
            if cut and lab[0] == lab[1]:
                continue
            slots = []
            for x in ground:
                r = lab[verts.index(x)]
                if r not in slots:
                    slots.append(r)
            touching = set(slots)
            weight = {}
            for i in range(2):
                weight[lab[i]] = weight.get(lab[i], 0) + hw[i]
            active = tuple(weight[r] for r in slots)
            finished = tuple(sorted(weight[r] for r in weight if r not in touching))
            if any(a >= spec.U for a in active) or not all(spec.allows(f) for f in finished):
                continue
            if len(active) + len(finished) > spec.k:
                continue
            if semiring == MINCOST:
                yield cut, Config(pin, pout, active, finished, None), cost
            else:
                val = 1 if semiring == COUNT else True
                yield cut, Config(pin, pout, active, finished, cost), val


def leaf_table(
    g: EmbeddedGraph,
    cluster: Cluster,
    spec: ProblemSpec,
    homes: dict[int, int],
    semiring: str = COUNT,
    mode: str = "auto",
) -> ClusterTable:
    ground = tuple(sorted(cluster.boundary))
    table = ClusterTable(cluster.id, semiring, ground)
    for _, cfg, val in leaf_entries(g, cluster, spec, homes, semiring, boundary_family(cluster, spec, mode)):
        _add(table.groups.setdefault(cfg.topo, {}), cfg.wkey, val, semiring)
    return table


_family_cache: dict[tuple, list[RGS]] = {}


def boundary_family(cluster: Cluster, spec: ProblemSpec, mode: str) -> list[RGS]:
    """Candidate ``pi_out`` partitions: noncrossing along theta when certified, else all."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    ground = tuple(sorted(cluster.boundary))
    use_nc = mode != "general" and cluster.theta is not None
    # pi_out alone may exceed k blocks; only pi_in v pi_out is bounded
    key = (cluster.theta if use_nc else ground, use_nc)
    if key not in _family_cache:
        parts = enumerate_noncrossing(cluster.theta) if use_nc else enumerate_all(ground)
        _family_cache[key] = [p.rgs for p in parts]
    return _family_cache[key]


@dataclass
class _Alignment:
    """How the blocks of ``pi_in1 v pi_in2 v pi_out0`` line up with each table's slots."""

    pin0: RGS
    pout1: RGS
    pout2: RGS
    slots0: list[int]
    slots1: list[int]
    slots2: list[int]
    fin_blocks: list[int]
    nblocks: int


class _Combiner:
    """Shared topology bookkeeping for Combine and for the descents."""

    def __init__(self, parent: Cluster, c1: Cluster, c2: Cluster) -> None:
        self.t0 = tuple(sorted(parent.boundary))
        self.t1 = tuple(sorted(c1.boundary))
        self.t2 = tuple(sorted(c2.boundary))
        omega = sorted(set(self.t0) | set(self.t1) | set(self.t2))
        idx = {x: i for i, x in enumerate(omega)}
        self.n = len(omega)
        self.p0 = [idx[x] for x in self.t0]
        self.p1 = [idx[x] for x in self.t1]
        self.p2 = [idx[x] for x in self.t2]
        self._cache: dict = {}

    def _restrict(self, lab: list[int], pos: list[int]) -> RGS:
        return canonical_rgs([lab[p] for p in pos])

    def pin0(self, pin1: RGS, pin2: RGS) -> RGS:
        key = ("in", pin1, pin2)
        if key not in self._cache:
            lab = _labels(self.n, [*_pairs(pin1, self.p1), *_pairs(pin2, self.p2)])
            self._cache[key] = self._restrict(lab, self.p0)
        return self._cache[key]

    def pout_child(self, pout0: RGS, pin_other: RGS, which: int) -> RGS:
        key = ("out", which, pout0, pin_other)
        if key not in self._cache:
            pos_other, pos_self = (self.p2, self.p1) if which == 1 else (self.p1, self.p2)
            lab = _labels(self.n, [*_pairs(pout0, self.p0), *_pairs(pin_other, pos_other)])
            self._cache[key] = self._restrict(lab, pos_self)
        return self._cache[key]

    def align(self, pin1: RGS, pin2: RGS, pout0: RGS) -> _Alignment:
        lab = _labels(
            self.n, [*_pairs(pin1, self.p1), *_pairs(pin2, self.p2), *_pairs(pout0, self.p0)]
        )
        ids: dict[int, int] = {}
        for r in lab:
            ids.setdefault(r, len(ids))
        block = [ids[r] for r in lab]

        def slots(pos: list[int]) -> list[int]:
            out: list[int] = []
            for p in pos:
                if block[p] not in out:
                    out.append(block[p])
            return out

        s0 = slots(self.p0)
        return _Alignment(
            self.pin0(pin1, pin2),
            self.pout_child(pout0, pin2, 1),
            self.pout_child(pout0, pin1, 2),
            s0,
            slots(self.p1),
            slots(self.p2),
            [b for b in range(len(ids)) if b not in s0],
            len(ids),
        )


def _merge_weights(al: _Alignment, k1: tuple, k2: tuple, spec: ProblemSpec):
    """Parent ``(active, finished)`` from two child weight keys, or ``None`` if pruned."""
    a1, f1 = k1[0], k1[1]
    a2, f2 = k2[0], k2[1]
    W = [0] * al.nblocks
    for j, b in enumerate(al.slots1):
        W[b] += a1[j]
    for j, b in enumerate(al.slots2):
        W[b] += a2[j]
    new_fin = [W[b] for b in al.fin_blocks]
    if len(al.slots0) + len(f1) + len(f2) + len(new_fin) > spec.k:
        return None
    for x in new_fin:
        if not (spec.L <= x < spec.U):
            return None
    active = tuple(W[b] for b in al.slots0)
    for x in active:
        if x >= spec.U:
            return None
    if new_fin or (f1 and f2):
        finished = tuple(sorted(f1 + f2 + tuple(new_fin)))
    else:
        finished = f1 or f2
    return active, finished


def convolve_pair(al: _Alignment, g1: dict, g2: dict, spec: ProblemSpec, semiring: str, out: dict) -> None:
    """Accumulate every pair of child entries under one topological triple into ``out``."""
    items2 = list(g2.items())
    for k1, v1 in g1.items():
        for k2, v2 in items2:
            if semiring == MINCOST:
                cost = v1 + v2
                if cost >= spec.S:
                    continue
                m = _merge_weights(al, k1, k2, spec)
                if m is None:
                    continue
                _add(out, m, cost, semiring)
            else:
                cost = k1[2] + k2[2]
                if cost >= spec.S:
                    continue
                m = _merge_weights(al, k1, k2, spec)
                if m is None:
                    continue
                _add(out, (m[0], m[1], cost), v1 * v2 if semiring == COUNT else True, semiring)


def combine(
    parent: Cluster,
    c1: Cluster,
    c2: Cluster,
    t1: ClusterTable,
    t2: ClusterTable,
    spec: ProblemSpec,
    semiring: str = COUNT,
    mode: str = "auto",
) -> ClusterTable:
    """Table of ``parent`` from its children's tables."""
    cmb = _Combiner(parent, c1, c2)
    table = ClusterTable(parent.id, semiring, cmb.t0)
    family = boundary_family(parent, spec, mode)
    by1, by2 = t1.by_pin(), t2.by_pin()
    for pin1 in sorted(by1):
        for pin2 in sorted(by2):
            pin0 = cmb.pin0(pin1, pin2)
            for pout0 in family:
                g1 = by1[pin1].get(cmb.pout_child(pout0, pin2, 1))
                if g1 is None:
                    continue
                g2 = by2[pin2].get(cmb.pout_child(pout0, pin1, 2))
                if g2 is None:
                    continue
                al = cmb.align(pin1, pin2, pout0)
                if len(al.slots0) > spec.k:
                    continue
                out = table.groups.setdefault((pin0, pout0), {})
                convolve_pair(al, g1, g2, spec, semiring, out)
    table.groups = {t: grp for t, grp in table.groups.items() if grp}
    return table


def convolve_weight_cost(a: np.ndarray, b: np.ndarray, method: str = "direct") -> np.ndarray:
    """Truncated multivariate polynomial product of two dense weight/cost arrays.

    Axis sizes are the exclusive caps (``U`` per weight slot, ``S`` for cost);
    products landing beyond a cap are dropped.  ``method="fft"`` is used only
    when the result is provably exact in float64, otherwise it falls back.
    """
    if a.shape != b.shape:
        raise ValueError("arrays must share a shape")
    shape = a.shape
    if method == "fft" and a.dtype != object:
        bound = int(a.sum()) * int(b.sum())
        if bound < 2**53:
            full = [2 * n - 1 for n in shape]
            axes = list(range(len(shape)))
            fa = np.fft.rfftn(a.astype(np.float64), full, axes)
            fb = np.fft.rfftn(b.astype(np.float64), full, axes)
            raw = np.fft.irfftn(fa * fb, full, axes)[tuple(slice(0, n) for n in shape)]
            res = np.rint(raw)
            if np.all(np.abs(raw - res) < 0.25) and np.all(res >= 0):
                return res.astype(a.dtype)
    elif method not in ("direct", "fft"):
        raise ValueError(f"unknown method {method!r}")
    out = np.zeros(shape, dtype=a.dtype)
    nz_b = list(zip(*np.nonzero(b)))
    for ia in zip(*np.nonzero(a)):
        va = a[ia]
        for ib in nz_b:
            idx = tuple(x + y for x, y in zip(ia, ib))
            if all(i < n for i, n in zip(idx, shape)):
                out[idx] += va * b[ib]
    return out


@dataclass
class DPResult:
    graph: EmbeddedGraph
    spec: ProblemSpec
    decomposition: SphereCutDecomposition
    homes: dict[int, int]
    semiring: str
    mode: str
    tables: dict[int, ClusterTable]

    @property
    def root_table(self) -> ClusterTable:
        return self.tables[self.decomposition.root]

    def root_entries(self) -> list[tuple[Config, object]]:
        """Root configurations that describe complete plans: exactly k finished districts."""
        return [
            (cfg, v)
            for cfg, v in self.root_table.items()
            if not cfg.active and len(cfg.finished) == self.spec.k
        ]


def run_dp(
    d: SphereCutDecomposition,
    g: EmbeddedGraph,
    spec: ProblemSpec,
    semiring: str = COUNT,
    mode: str = "auto",
) -> DPResult:
    """Fill every cluster table bottom-up; all tables are kept for the descents."""
    if semiring not in SEMIRINGS:
        raise ValueError(f"unknown semiring {semiring!r}")
    spec.check_total(g.total_weight)
    homes = assign_homes(g)
    tables: dict[int, ClusterTable] = {}
    for cid in d.postorder():
        c = d.clusters[cid]
        if c.is_leaf:
            tables[cid] = leaf_table(g, c, spec, homes, semiring, mode)
        else:
            a, b = c.children
            tables[cid] = combine(c, d.clusters[a], d.clusters[b], tables[a], tables[b], spec, semiring, mode)
    return DPResult(g, spec, d, homes, semiring, mode, tables)


def consistent_children(res: DPResult, cid: int, cfg: Config) -> Iterator[tuple[Config, object, Config, object]]:
    """Child configuration pairs consistent with ``cfg``, in a fixed deterministic order."""
    d = res.decomposition
    c = d.clusters[cid]
    a, b = c.children
    c1, c2 = d.clusters[a], d.clusters[b]
    cmb = _Combiner(c, c1, c2)
    by1, by2 = res.tables[a].by_pin(), res.tables[b].by_pin()
    spec = res.spec
    for pin1 in sorted(by1):
        for pin2 in sorted(by2):
            if cmb.pin0(pin1, pin2) != cfg.pin:
                continue
            pout1 = cmb.pout_child(cfg.pout, pin2, 1)
            pout2 = cmb.pout_child(cfg.pout, pin1, 2)
            g1 = by1[pin1].get(pout1)
            g2 = by2[pin2].get(pout2)
            if g1 is None or g2 is None:
                continue
            al = cmb.align(pin1, pin2, cfg.pout)
            items2 = sorted(g2.items())
            for k1, v1 in sorted(g1.items()):
                for k2, v2 in items2:
                    if res.semiring == MINCOST:
                        if v1 + v2 != res.tables[cid].get(cfg):
                            continue
                    elif k1[2] + k2[2] != cfg.cost:
                        continue
                    m = _merge_weights(al, k1, k2, spec)
                    if m is None or m != (cfg.active, cfg.finished):
                        continue
                    yield _config((pin1, pout1), k1), v1, _config((pin2, pout2), k2), v2


def leaf_cut(res: DPResult, cid: int, cfg: Config) -> bool:
    """Whether the leaf configuration ``cfg`` cuts its edge."""
    c = res.decomposition.clusters[cid]
    for cut, lc, _ in leaf_entries(res.graph, c, res.spec, res.homes, res.semiring, [cfg.pout]):
        if lc == cfg:
            return cut
    raise KeyError(f"configuration {cfg} is not in leaf {cid}")

