"""Partitions of small boundary sets.

A partition is stored canonically as a restricted-growth string (RGS) over
its ground set sorted by vertex id.  Crossing tests take a separate cyclic
order; the id order is only used for canonical labels and representatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence


def canonical_rgs(labels: Sequence) -> tuple[int, ...]:
    """Relabel a block-label sequence so labels appear in first-occurrence order 0, 1, 2, ..."""
    seen: dict = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


@dataclass(frozen=True)
class BoundaryPartition:
    ground: tuple[int, ...]
    rgs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.ground) != len(self.rgs):
            raise ValueError("ground and rgs differ in length")
        if list(self.ground) != sorted(set(self.ground)):
            raise ValueError("ground must be sorted and duplicate-free")
        if canonical_rgs(self.rgs) != self.rgs:
            raise ValueError(f"{self.rgs} is not a restricted-growth string")

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "BoundaryPartition":
        label: dict[int, int] = {}
        for i, block in enumerate(blocks):
            for x in block:
                if x in label:
                    raise ValueError(f"element {x} appears in two blocks")
                label[x] = i
        ground = tuple(sorted(label))
        return cls(ground, canonical_rgs([label[x] for x in ground]))

    @classmethod
    def singletons(cls, ground: Iterable[int]) -> "BoundaryPartition":
        g = tuple(sorted(ground))
        return cls(g, tuple(range(len(g))))

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.num_blocks)]
        for x, b in zip(self.ground, self.rgs):
            out[b].append(x)
        return tuple(tuple(b) for b in out)

    @property
    def num_blocks(self) -> int:
        return max(self.rgs) + 1 if self.rgs else 0

    def label_of(self) -> dict[int, int]:
        return dict(zip(self.ground, self.rgs))

    def restrict(self, subset: Iterable[int]) -> "BoundaryPartition":
        lab = self.label_of()
        g = tuple(sorted(subset))
        return BoundaryPartition(g, canonical_rgs([lab[x] for x in g]))

    def refines(self, other: "BoundaryPartition") -> bool:
        """``self`` is finer than or equal to ``other`` (on the same ground)."""
        lab = other.label_of()
        return all(len({lab[x] for x in b}) == 1 for b in self.blocks)

    def __str__(self) -> str:
        return "|".join(",".join(map(str, b)) for b in self.blocks) or "{}"


def _check_order(ground: Sequence[int], order: Sequence[int]) -> None:
    if sorted(order) != sorted(ground) or len(set(order)) != len(order):
        raise ValueError("order is not a permutation of the ground set")


def crossing_rgs(rgs: Sequence[int]) -> bool:
    """Whether the block-label sequence (read along a cycle) has a crossing a<b<c<d."""
    positions: dict[int, list[int]] = {}
    for i, b in enumerate(rgs):
        positions.setdefault(b, []).append(i)
    blocks = list(positions.values())
    for A, B in combinations(blocks, 2):
        # B crosses A iff B has elements in two different arcs cut out by A
        lo, hi = A[0], A[-1]
        arcs = set()
        for x in B:
            if x < lo or x > hi:
                arcs.add(-1)
            else:
                arcs.add(sum(1 for a in A if a < x))
            if len(arcs) > 1:
                return True
    return False


def is_noncrossing(p: BoundaryPartition, order: Sequence[int]) -> bool:
    _check_order(p.ground, order)
    lab = p.label_of()
    return not crossing_rgs([lab[x] for x in order])


def _nc_labels(n: int) -> Iterator[list[int]]:
    """Noncrossing block labelings of positions 0..n-1 (labels are block minima)."""
    if n == 0:
        yield []
        return

    def gaps(lo: int, hi: int) -> Iterator[dict[int, int]]:
        # noncrossing partitions of the interval [lo, hi)
        if lo >= hi:
            yield {}
            return
        rest = list(range(lo + 1, hi))
        for r in range(len(rest) + 1):
            for chosen in combinations(rest, r):
                cuts = [lo, *chosen, hi]
                pieces = [(cuts[i] + 1, cuts[i + 1]) for i in range(len(cuts) - 1)]
                for sub in _product(pieces):
                    lab = {lo: lo}
                    for c in chosen:
                        lab[c] = lo
                    lab.update(sub)
                    yield lab

    def _product(pieces: list[tuple[int, int]]) -> Iterator[dict[int, int]]:
        if not pieces:
            yield {}
            return
        (a, b), tail = pieces[0], pieces[1:]
        for first in gaps(a, b):
            for more in _product(tail):
                yield {**first, **more}

    for lab in gaps(0, n):
        yield [lab[i] for i in range(n)]


def enumerate_noncrossing(order: Sequence[int]) -> Iterator[BoundaryPartition]:
    """Every partition of ``order`` that is noncrossing along the cyclic order, once each."""
    ground = tuple(sorted(order))
    if len(set(order)) != len(order):
        raise ValueError("order has repeated elements")
    pos = {x: i for i, x in enumerate(order)}
    for lab in _nc_labels(len(order)):
        yield BoundaryPartition(ground, canonical_rgs([lab[pos[x]] for x in ground]))


def enumerate_all(ground: Iterable[int]) -> Iterator[BoundaryPartition]:
    """Every set partition of ``ground`` (Bell-many), in RGS lexicographic order."""
    g = tuple(sorted(ground))
    n = len(g)
    rgs = [0] * n

    def rec(i: int, top: int) -> Iterator[BoundaryPartition]:
        if i == n:
            yield BoundaryPartition(g, tuple(rgs))
            return
        for b in range(top + 2):
            rgs[i] = b
            yield from rec(i + 1, max(top, b))

    if n == 0:
        yield BoundaryPartition((), ())
        return
    rgs[0] = 0
    yield from rec(1, 0)


class _DSU:
    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def join(*parts: BoundaryPartition) -> BoundaryPartition:
    """Finest common coarsening; ground sets may differ and the result covers their union."""
    dsu = _DSU()
    for p in parts:
        for b in p.blocks:
            for x in b:
                dsu.union(b[0], x)
    ground = tuple(sorted(dsu.parent))
    return BoundaryPartition(ground, canonical_rgs([dsu.find(x) for x in ground]))


def representatives(p: BoundaryPartition) -> tuple[int, ...]:
    """Smallest-id element of each block, ordered as the blocks are discovered by id."""
    return tuple(b[0] for b in p.blocks)


def encode(p: BoundaryPartition) -> str:
    return " ".join(map(str, p.rgs))


def decode(key: str, ground: Iterable[int]) -> BoundaryPartition:
    rgs = tuple(int(x) for x in key.split()) if key.strip() else ()
    return BoundaryPartition(tuple(sorted(ground)), rgs)

