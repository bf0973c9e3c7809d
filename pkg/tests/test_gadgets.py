import json
from itertools import product

import pytest

from spherecut.dp import FEASIBILITY
from spherecut.gadgets import (
    BinPackingInstance,
    GadgetViolation,
    binpacking_gadget,
    bins_to_plan,
    bp_feasible,
    expand_unit_weights,
    grid,
    plan_to_bins,
)
from spherecut.graph import GraphError, preprocess
from spherecut.oracle import enumerate_all
from spherecut.solve import NoSolution, Solver, plan_from_blocks, validate_plan


@pytest.mark.parametrize("r,c,nv,ne", [(2, 2, 4, 4), (3, 3, 9, 12), (2, 3, 6, 7)])
def test_grid_sizes(r, c, nv, ne):
    g = grid(r, c)
    assert (len(g.weights), len(g.ends)) == (nv, ne)


def test_grid_rules():
    g = grid(2, 3, weight=lambda i, j: 10 * i + j, cost=7)
    assert g.weights[4] == 11 and set(g.costs.values()) == {7}


def test_padding():
    bp = BinPackingInstance((2, 1), 2, 3)
    assert not bp.is_padded
    assert bp.padded().values == (2, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        BinPackingInstance((4, 4), 2, 3).padded()
    with pytest.raises(ValueError):
        BinPackingInstance((0,), 2, 3)


def test_bp_feasible():
    assert bp_feasible(BinPackingInstance((1, 2, 3), 2, 3)) == [[0, 1], [2]]
    assert bp_feasible(BinPackingInstance((2, 2, 2), 2, 3)) is None
    assert bp_feasible(BinPackingInstance((3, 1), 2, 2)) is None


def test_gadget_shape_and_weights():
    gi = binpacking_gadget(BinPackingInstance((1, 1), 2, 1))
    assert [len(r) for r in gi.rows] == [2, 3, 2, 3, 2]
    w = gi.graph.weights
    assert gi.scale == 2
    assert {w[v] for v in gi.rows[0]} == {8}
    assert {w[v] for v in gi.rows[4]} == {32}
    assert {w[v] for v in gi.rows[2]} == {1}
    assert {w[v] for v in gi.rows[1]} == {2}
    assert gi.spec.U == gi.spec.L + 1
    assert len(gi.labels()) == 12


@pytest.mark.parametrize("values,k,B", [((1, 1), 2, 1), ((1, 2, 3), 2, 3), ((1, 1, 1, 1, 1, 1), 3, 2), ((2, 2), 1, 4)])
def test_one_vertex_per_row_weighs_scaled_T(values, k, B):
    gi = binpacking_gadget(BinPackingInstance(values, k, B))
    n, kB = len(values), k * B
    T_scaled = gi.scale * (kB**2 + kB**4 + kB) + (n - 1)
    for choice in product(*[range(len(r)) for r in gi.rows[:5]]):
        pick = [r[j] for r, j in zip(gi.rows, choice)] + [r[0] for r in gi.rows[5:]]
        assert sum(gi.graph.weights[v] for v in pick) == T_scaled
    assert gi.spec.L == T_scaled + gi.scale * B
    assert gi.graph.total_weight == k * gi.spec.L


@pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 3), (6, 3), (4, 2)])
def test_gadget_planar(n, k):
    gi = binpacking_gadget(BinPackingInstance((1,) * n, k, -(-n // k)).padded())
    g = gi.graph
    assert len(g.weights) - len(g.ends) + len(g.faces) == 2


def test_gadget_needs_padding_and_two_values():
    with pytest.raises(ValueError):
        binpacking_gadget(BinPackingInstance((1,), 2, 1))
    with pytest.raises(ValueError):
        binpacking_gadget(BinPackingInstance((2,), 1, 2))


def test_completeness_round_trip():
    bp = BinPackingInstance((1, 2, 3), 2, 3)
    gi = binpacking_gadget(bp)
    bins = [[0, 1], [2]]
    plan = bins_to_plan(gi, bins)
    assert validate_plan(gi.graph, gi.spec, plan) == []
    assert sorted(map(sorted, plan_to_bins(gi, plan))) == sorted(map(sorted, bins))


def test_k1_single_bin():
    gi = binpacking_gadget(BinPackingInstance((1, 1), 1, 2))
    plan = plan_from_blocks(gi.graph, [gi.graph.vertices])
    assert validate_plan(gi.graph, gi.spec, plan) == []
    assert plan_to_bins(gi, plan) == [[0, 1]]


def test_feasible_gadget_solved():
    gi = binpacking_gadget(BinPackingInstance((1, 1), 2, 1))
    _, plan = Solver(gi.graph, gi.spec, semiring=FEASIBILITY).optimize()
    assert sorted(map(sorted, plan_to_bins(gi, plan))) == [[0], [1]]


def test_infeasible_gadget():
    gi = binpacking_gadget(BinPackingInstance((3, 1), 2, 2))
    with pytest.raises(NoSolution):
        Solver(gi.graph, gi.spec, semiring=FEASIBILITY).optimize()


def test_gadget_plans_match_oracle_on_smallest():
    gi = binpacking_gadget(BinPackingInstance((1, 1), 2, 1))
    oracle = enumerate_all(gi.graph, gi.spec)
    s = Solver(gi.graph, gi.spec)
    assert s.count() == oracle.total > 0
    for p in oracle.plans:
        plan = plan_from_blocks(gi.graph, p.blocks)
        assert sorted(map(len, plan_to_bins(gi, plan))) == [1, 1]


def test_plan_to_bins_rejects_broken_structure():
    gi = binpacking_gadget(BinPackingInstance((1, 1), 2, 1))
    top = gi.rows[0]
    rest = [v for v in gi.graph.vertices if v != top[1]]
    plan = plan_from_blocks(gi.graph, [rest, [top[1]]])
    with pytest.raises(GadgetViolation):
        plan_to_bins(gi, plan)


def test_labels_sidecar(tmp_path):
    gi = binpacking_gadget(BinPackingInstance((1, 1), 2, 1))
    gi.save(tmp_path / "g.json", tmp_path / "l.json")
    data = json.loads((tmp_path / "l.json").read_text())
    assert data["labels"]["s_2^3"] == gi.rows[1][2]
    assert data["L"] == gi.spec.L


def test_expand_unit_weights():
    g = grid(2, 2, weight=lambda i, j: 1 + 2 * i + j)
    ex = expand_unit_weights(g)
    h = ex.graph
    assert set(h.weights.values()) == {1}
    assert len(h.weights) == g.total_weight
    assert sum(1 for d in ex.parent.values() if d == 3) == 3
    red = preprocess(h)
    assert red.graph.weights == g.weights
    assert {e: red.graph.ends[e] for e in g.ends} == g.ends


def test_expand_identity_and_errors():
    g = grid(2, 3)
    assert expand_unit_weights(g).graph.rotation == g.rotation
    with pytest.raises(GraphError):
        expand_unit_weights(grid(2, 2, weight=0))
    with pytest.raises(ValueError):
        expand_unit_weights(grid(2, 2, weight=5), cap=10)


def test_expanded_instance_same_answers():
    g = grid(2, 3, weight=lambda i, j: 1 + (i + j) % 2)
    from spherecut.graph import ProblemSpec

    spec = ProblemSpec(2, 4, 6, 8)
    ex = expand_unit_weights(g).graph
    assert Solver(ex, spec).optimize()[0] == Solver(g, spec).optimize()[0]


def padded(k, max_n, B):
    from itertools import combinations_with_replacement

    for n in range(2, max_n + 1):
        for values in combinations_with_replacement(range(1, k * B), n):
            if sum(values) == k * B:
                yield BinPackingInstance(values, k, B)


@pytest.mark.parametrize("k,B", [(1, 2), (1, 4), (2, 2), (2, 4), (3, 1)])
def test_reduction_matches_brute_force(k, B):
    for bp in padded(k, 4, B):
        gi = binpacking_gadget(bp)
        try:
            Solver(gi.graph, gi.spec, semiring=FEASIBILITY).optimize()
            ok = True
        except NoSolution:
            ok = False
        assert ok == (bp_feasible(bp) is not None), bp
