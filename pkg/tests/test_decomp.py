import json

import pytest

from spherecut.decomp import (
    DecompositionError,
    caterpillar,
    export_decomposition,
    import_decomposition,
    noose_order,
    radial_bfs_decomposition,
    sweep_decomposition,
    validate,
)
from spherecut.dp import assign_homes
from spherecut.gadgets import BinPackingInstance, binpacking_gadget, grid
from spherecut.graph import ProblemSpec, radial_graph
from spherecut.ncp import BoundaryPartition, is_noncrossing
from spherecut.oracle import cluster_table_oracle

from conftest import triangle


def test_triangle_width_two():
    g = triangle()
    for d in (sweep_decomposition(g), radial_bfs_decomposition(g)):
        assert validate(d, g) == []
        assert d.width == 2


@pytest.mark.parametrize("r,c", [(2, 2), (3, 3), (4, 4), (3, 6), (5, 5)])
def test_sweep_valid_and_narrow(r, c):
    g = grid(r, c)
    d = sweep_decomposition(g)
    assert validate(d, g) == []
    assert d.width <= r + 1
    assert d.certified_fraction() == 1.0


def test_grid_4x4_width_reported():
    assert sweep_decomposition(grid(4, 4)).width <= 5


@pytest.mark.parametrize("r,c", [(2, 2), (3, 4), (4, 4), (5, 6)])
def test_radial_width_bounded_by_eccentricity(r, c):
    g = grid(r, c)
    d = radial_bfs_decomposition(g)
    assert validate(d, g) == []
    ecc = radial_graph(g).eccentricity(("f", g.outer_face))
    assert d.width <= 2 * ecc


def test_radial_from_vertex_root():
    g = grid(3, 3)
    d = radial_bfs_decomposition(g, root=("v", 4))
    assert validate(d, g) == []
    assert d.width <= 2 * radial_graph(g).eccentricity(("v", 4))
    with pytest.raises(DecompositionError):
        radial_bfs_decomposition(g, root=("v", 99))


def test_gadget_decompositions_valid():
    gi = binpacking_gadget(BinPackingInstance((1, 2, 3), 2, 3))
    for d in (sweep_decomposition(gi.graph), radial_bfs_decomposition(gi.graph)):
        assert validate(d, gi.graph) == []


def test_caterpillar_any_order_is_valid():
    g = grid(3, 3)
    d = caterpillar(g, sorted(g.edges, reverse=True))
    assert validate(d, g) == []


def test_noose_order_on_grid_square():
    g = grid(3, 3)
    # edges of the top-left unit square: 0-1, 3-4, 0-3, 1-4
    ids = {frozenset(uv): e for e, uv in g.ends.items()}
    sq = frozenset(ids[frozenset(p)] for p in [(0, 1), (3, 4), (0, 3), (1, 4)])
    order = noose_order(g, sq, frozenset({1, 3, 4}))
    assert sorted(order) == [1, 3, 4]
    # 4 boundary vertices: first two rows of the grid
    top = frozenset(e for e, (a, b) in g.ends.items() if a < 6 and b < 6)
    bd = frozenset({3, 4, 5})
    assert sorted(noose_order(g, top, bd)) == [3, 4, 5]


def test_noose_rejects_two_separate_pieces():
    g = grid(3, 3)
    ids = {frozenset(uv): e for e, uv in g.ends.items()}
    two = frozenset({ids[frozenset((0, 1))], ids[frozenset((7, 8))]})
    assert noose_order(g, two, frozenset({0, 1, 7, 8})) is None


@pytest.mark.parametrize("builder", [sweep_decomposition, radial_bfs_decomposition])
def test_realizable_inside_partitions_are_noncrossing(builder):
    g = grid(4, 4)
    d = builder(g)
    spec = ProblemSpec(16, 0, 100, 100)
    homes = assign_homes(g)
    checked = 0
    for c in d.clusters.values():
        if c.theta is None or len(c.edges) > 10 or len(c.boundary) < 4:
            continue
        ground = tuple(sorted(c.boundary))
        single = tuple(range(len(ground)))
        tab = cluster_table_oracle(g, c.edges, spec, homes, pouts=[single])
        for pin, *_ in tab:
            assert is_noncrossing(BoundaryPartition(ground, pin), c.theta)
        checked += 1
    assert checked > 0


def test_export_import_round_trip(tmp_path):
    g = grid(3, 4)
    d = sweep_decomposition(g)
    p = tmp_path / "d.json"
    p.write_text(json.dumps(export_decomposition(d)))
    d2 = import_decomposition(p, g)
    assert d2.width == d.width
    assert {c.edges for c in d2.clusters.values()} == {c.edges for c in d.clusters.values()}
    assert validate(d2, g) == []


def _mutated(g, fn):
    data = export_decomposition(sweep_decomposition(g))
    fn(data)
    return data


def test_import_reports_duplicate_leaf():
    g = grid(2, 3)

    def dup(data):
        leaves = [n for n in data["nodes"] if n["children"] is None]
        leaves[0]["edges"] = list(leaves[1]["edges"])

    with pytest.raises(DecompositionError) as exc:
        import_decomposition(_mutated(g, dup), g)
    assert any("leaf bijection" in v for v in exc.value.violations)
    assert any("disjoint union" in v for v in exc.value.violations)


def test_import_rejects_nonbinary():
    g = grid(2, 3)

    def tri(data):
        inner = next(n for n in data["nodes"] if n["children"])
        inner["children"] = inner["children"] + [inner["children"][0]]

    with pytest.raises(DecompositionError, match="not binary"):
        import_decomposition(_mutated(g, tri), g)


def test_import_rejects_bad_theta_when_not_recertified():
    g = grid(2, 3)

    def bad(data):
        n = next(n for n in data["nodes"] if n.get("theta") and len(n["theta"]) >= 2)
        n["theta"] = n["theta"][:-1]

    with pytest.raises(DecompositionError, match="theta"):
        import_decomposition(_mutated(g, bad), g, recertify=False)
