import itertools

import pytest
from hypothesis import given, strategies as st

from pottstm.partition import (
    SetPartition, all_partitions, bell, canonical_labels, catalan, count_states,
    delete_vertex, join_labels, join_vertices, lattice_join, singleton_partition,
)


def labels_strategy(max_n=7):
    return st.lists(st.integers(0, max_n - 1), min_size=1, max_size=max_n).map(canonical_labels)


def test_canonical_form():
    assert canonical_labels((5, 5, 2, 5, 9)) == (0, 0, 1, 0, 2)
    assert SetPartition((1, 2, 3), (2, 0, 2)) == SetPartition((1, 2, 3), (0, 1, 0))


def test_str_and_blocks():
    p = SetPartition.from_blocks([[3, 1], [2]])
    assert p.scope == (1, 2, 3)
    assert str(p) == "{{1,3},{2}}"
    assert p.same_block(1, 3) and not p.same_block(1, 2)


def test_join_and_delete():
    p = singleton_partition((1, 2, 3))
    p = join_vertices(p, 1, 3)
    assert str(p) == "{{1,3},{2}}"
    q, single = delete_vertex(p, 2)
    assert single and str(q) == "{{1,3}}"
    q, single = delete_vertex(p, 1)
    assert not single and q.scope == (2, 3) and q.labels == (0, 1)


def test_unknown_vertex():
    with pytest.raises(KeyError):
        singleton_partition((1, 2)).index(7)


def test_lattice_join_example():
    a = SetPartition.from_blocks([[1, 2], [3]])
    b = SetPartition.from_blocks([[2, 3], [4]])
    assert str(lattice_join(a, b)) == "{{1,2,3},{4}}"


@pytest.mark.parametrize("n, c, b", [(0, 1, 1), (1, 1, 1), (2, 2, 2), (3, 5, 5), (4, 14, 15),
                                     (5, 42, 52), (6, 132, 203), (10, 16796, 115975)])
def test_counts(n, c, b):
    assert catalan(n) == c and bell(n) == b
    assert count_states(n, True) == c and count_states(n, False) == b


@pytest.mark.parametrize("n", range(0, 8))
def test_all_partitions_enumerates_bell(n):
    parts = list(all_partitions(n))
    assert len(parts) == len(set(parts)) == bell(n)
    assert all(canonical_labels(p) == p for p in parts)


@given(labels_strategy(), st.data())
def test_join_labels_matches_naive(labels, data):
    n = len(labels)
    a = data.draw(st.integers(0, n - 1))
    b = data.draw(st.integers(0, n - 1))
    x, y = labels[a], labels[b]
    naive = canonical_labels(x if t == y else t for t in labels)
    assert join_labels(labels, a, b) == naive


@given(labels_strategy(), st.data())
def test_join_commutes(labels, data):
    n = len(labels)
    i, j, k, l = (data.draw(st.integers(0, n - 1)) for _ in range(4))
    assert join_labels(join_labels(labels, i, j), k, l) == join_labels(join_labels(labels, k, l), i, j)


@given(labels_strategy(), labels_strategy(), labels_strategy())
def test_lattice_join_laws(x, y, z):
    n = min(len(x), len(y), len(z))
    scope = tuple(range(n))
    p, q, r = (SetPartition(scope, t[:n]) for t in (x, y, z))
    assert lattice_join(p, q) == lattice_join(q, p)
    assert lattice_join(p, p) == p
    assert lattice_join(lattice_join(p, q), r) == lattice_join(p, lattice_join(q, r))
    assert lattice_join(p, singleton_partition(scope)) == p


@given(labels_strategy())
def test_join_as_product_of_joins(labels):
    # p v q equals q's blocks applied as pairwise joins to p
    scope = tuple(range(len(labels)))
    p = SetPartition(scope, labels)
    q = SetPartition(scope, tuple(reversed(labels)))
    expect = p
    for blk in q.blocks():
        for a, b in itertools.pairwise(blk):
            expect = join_vertices(expect, a, b)
    assert lattice_join(p, q) == expect


@given(labels_strategy())
def test_delete_flags_singletons(labels):
    scope = tuple(range(len(labels)))
    p = SetPartition(scope, labels)
    for v in scope:
        q, single = delete_vertex(p, v)
        assert single == (labels.count(labels[v]) == 1)
        assert sorted(map(sorted, q.blocks())) == sorted(
            sorted(x for x in b if x != v) for b in p.blocks() if b != [v])
