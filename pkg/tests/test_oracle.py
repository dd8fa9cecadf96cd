import random

import pytest
from hypothesis import given, strategies as st

from conftest import complete, cycle, random_graph
from pottstm.graph import Graph
from pottstm.oracle import (
    MinorKind, MinorOp, OracleGuardError, apply_minor, colouring_count, deletion_contraction,
    fk_brute_force, fk_table,
)
from pottstm.weights import Mode, Weight, evaluate, specialise_v, weight_add, weight_mul

K2 = Graph(2, [(0, 1)])


def test_k2_and_triangle():
    assert fk_brute_force(K2) == Weight.bivariate([[0, 0, 1], [0, 1]])
    assert fk_brute_force(complete(3)) == Weight.bivariate([[0, 0, 0, 1], [0, 0, 3], [0, 3], [0, 1]])
    assert deletion_contraction(K2) == fk_brute_force(K2)
    assert deletion_contraction(complete(3)) == fk_brute_force(complete(3))


def test_empty_graph():
    assert fk_brute_force(Graph(4, [])) == Weight.bivariate([[0, 0, 0, 0, 1]])
    assert fk_table(Graph(2, [])) == {(0, 2): 1}


def test_tree_closed_form():
    tree = Graph(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    q_plus_v = Weight.bivariate([[0, 1], [1]])
    expect = Weight.bivariate([[0, 1]])
    for _ in range(4):
        expect = weight_mul(expect, q_plus_v)
    assert deletion_contraction(tree) == expect == fk_brute_force(tree)


def test_colourings():
    assert colouring_count(complete(3), 3) == 6
    assert colouring_count(complete(3), 2) == 0
    assert colouring_count(Graph(0, []), 5) == 1
    assert colouring_count(cycle(5), 0) == 0


def test_guards():
    big = Graph(8, [(a, b) for a in range(8) for b in range(a + 1, 8)])
    with pytest.raises(OracleGuardError):
        fk_brute_force(big)
    with pytest.raises(OracleGuardError):
        deletion_contraction(big)
    with pytest.raises(OracleGuardError):
        colouring_count(Graph(30, []), 3)


def test_modes():
    g = cycle(4)
    assert fk_brute_force(g, Mode.UNIVARIATE, v=-1) == Weight.univariate([0, -3, 6, -4, 1])
    assert fk_brute_force(g, Mode.MODULAR, v=-1, prime=7) == Weight.modular([0, -3, 6, -4, 1], 7)
    assert fk_brute_force(g, Mode.SCALAR, v=1, q=2).coeffs == evaluate(fk_brute_force(g), 2, 1)
    assert deletion_contraction(g, Mode.UNIVARIATE, v=-1) == fk_brute_force(g, Mode.UNIVARIATE, v=-1)


def test_minor_ops():
    g = cycle(4)
    assert apply_minor(g, MinorOp(MinorKind.DELETE, (0, 1))).n_edges == 3
    c = apply_minor(g, MinorOp(MinorKind.CONTRACT, (0, 1)))
    assert c.n_vertices == 3 and c.n_edges == 3
    with pytest.raises(ValueError):
        apply_minor(complete(3), MinorOp(MinorKind.CONTRACT, (0, 1)))
    with pytest.raises(ValueError):
        apply_minor(g, MinorOp(MinorKind.DELETE, (0, 2)))


def test_potts_equals_fk_on_small_graphs(small_connected):
    for g in small_connected:
        fk = fk_brute_force(g)
        for q in range(5):
            assert evaluate(fk, q, -1) == colouring_count(g, q)


@pytest.mark.parametrize("n", range(2, 9))
def test_chromatic_closed_forms(n):
    def chi(g, q):
        return evaluate(Weight.univariate(specialise_v(fk_brute_force(g), -1)), q)

    path = Graph(n, [(i, i + 1) for i in range(n - 1)])
    for q in range(6):
        assert chi(path, q) == q * (q - 1) ** (n - 1)
        if n >= 3:
            assert chi(cycle(n), q) == (q - 1) ** n + (-1) ** n * (q - 1)
        if n <= 6:
            falling = 1
            for k in range(n):
                falling *= q - k
            assert chi(complete(n), q) == falling


@given(st.integers(0, 10**6), st.integers(1, 7), st.integers(0, 14))
def test_fk_equals_deletion_contraction(seed, n, m):
    g = random_graph(random.Random(seed), n, m)
    assert fk_brute_force(g) == deletion_contraction(g)


@given(st.integers(0, 10**6), st.integers(2, 7), st.integers(1, 14))
def test_deletion_contraction_identity(seed, n, m):
    rng = random.Random(seed)
    g = random_graph(rng, n, m)
    if not g.edges:
        return
    e = rng.choice(g.edges)
    if g.neighbours(e[0]) & g.neighbours(e[1]):
        return
    deleted = fk_brute_force(apply_minor(g, MinorOp(MinorKind.DELETE, e)))
    contracted = fk_brute_force(apply_minor(g, MinorOp(MinorKind.CONTRACT, e)))
    v = Weight.bivariate([[], [1]])
    assert fk_brute_force(g) == weight_add(deleted, weight_mul(v, contracted))
