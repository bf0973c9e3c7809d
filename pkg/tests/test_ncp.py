from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherecut.ncp import (
    BoundaryPartition,
    canonical_rgs,
    crossing_rgs,
    decode,
    encode,
    enumerate_all,
    enumerate_noncrossing,
    is_noncrossing,
    join,
    representatives,
)


def bell(n):
    # Bell triangle
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def catalan(m):
    c = [1]
    for i in range(m):
        c.append(sum(c[j] * c[i - j] for j in range(i + 1)))
    return c[m]


def test_canonical_rgs():
    assert canonical_rgs("baab") == (0, 1, 1, 0)
    assert canonical_rgs([]) == ()


def test_partition_validation():
    with pytest.raises(ValueError):
        BoundaryPartition((1, 2), (1, 0))
    with pytest.raises(ValueError):
        BoundaryPartition((2, 1), (0, 0))
    with pytest.raises(ValueError):
        BoundaryPartition.from_blocks([[1, 2], [2]])


def test_blocks_and_representatives():
    p = BoundaryPartition.from_blocks([[7, 3], [5], [9, 1]])
    assert p.ground == (1, 3, 5, 7, 9)
    assert p.blocks == ((1, 9), (3, 7), (5,))
    assert representatives(p) == (1, 3, 5)
    assert str(p) == "1,9|3,7|5"


def test_crossing():
    assert crossing_rgs([0, 1, 0, 1])
    assert not crossing_rgs([0, 1, 1, 0])
    assert not crossing_rgs([0, 0, 1, 1, 2, 0])
    p = BoundaryPartition.from_blocks([[1, 3], [2, 4]])
    assert not is_noncrossing(p, [1, 2, 3, 4])
    assert is_noncrossing(p, [1, 3, 2, 4])


@pytest.mark.parametrize("n", range(0, 8))
def test_enumerate_all_is_bell(n):
    parts = list(enumerate_all(range(n)))
    assert len(parts) == bell(n)
    assert len(set(parts)) == len(parts)


@pytest.mark.parametrize("m", range(0, 9))
def test_noncrossing_count_and_membership(m):
    order = list(range(10, 10 + m))[::-1]
    nc = list(enumerate_noncrossing(order))
    assert len(nc) == catalan(m) == len(set(nc))
    brute = [p for p in enumerate_all(order) if is_noncrossing(p, order)]
    assert set(nc) == set(brute)


def test_noncrossing_depends_on_order():
    a = set(enumerate_noncrossing([1, 2, 3, 4]))
    b = set(enumerate_noncrossing([1, 3, 2, 4]))
    assert a != b and len(a) == len(b) == 14


def test_noncrossing_invariant_under_rotation():
    base = [4, 8, 1, 6, 3]
    ref = set(enumerate_noncrossing(base))
    for s in range(len(base)):
        assert set(enumerate_noncrossing(base[s:] + base[:s])) == ref


def test_join_examples():
    a = BoundaryPartition.from_blocks([[1, 2], [3], [4]])
    b = BoundaryPartition.from_blocks([[2, 3], [4], [1]])
    assert join(a, b).blocks == ((1, 2, 3), (4,))
    c = BoundaryPartition.from_blocks([[4, 5]])
    assert join(a, c).blocks == ((1, 2), (3,), (4, 5))


partitions = st.integers(0, 6).flatmap(
    lambda n: st.lists(st.integers(0, n), min_size=n, max_size=n).map(
        lambda labels: BoundaryPartition(tuple(range(len(labels))), canonical_rgs(labels))
    )
)


@settings(max_examples=200)
@given(partitions, st.data())
def test_join_lattice_laws(p, data):
    n = len(p.ground)
    labels = data.draw(st.lists(st.integers(0, max(n, 1)), min_size=n, max_size=n))
    q = BoundaryPartition(p.ground, canonical_rgs(labels))
    j = join(p, q)
    assert j == join(q, p)
    assert join(p, p) == p
    assert p.refines(j) and q.refines(j)
    # least: any common coarsening is coarser than j
    for r in [j, BoundaryPartition(p.ground, (0,) * n)]:
        if p.refines(r) and q.refines(r):
            assert j.refines(r)


@given(partitions)
def test_encode_decode(p):
    assert decode(encode(p), p.ground) == p


def test_restrict():
    p = BoundaryPartition.from_blocks([[1, 4], [2, 3]])
    assert p.restrict([3, 4]).blocks == ((3,), (4,))
    assert p.restrict([1, 4, 2]).blocks == ((1, 4), (2,))


def test_small_noncrossing_by_permutation_brute_force():
    # every partition of 4 points except {1,3}|{2,4} is noncrossing on the cycle 1,2,3,4
    order = [1, 2, 3, 4]
    nc = set(enumerate_noncrossing(order))
    assert BoundaryPartition.from_blocks([[1, 3], [2, 4]]) not in nc
    assert len(nc) == bell(4) - 1
    # and every cyclic relabelling agrees with a direct check
    for perm in permutations(order):
        assert set(enumerate_noncrossing(list(perm))) == {
            p for p in enumerate_all(order) if is_noncrossing(p, list(perm))
        }
