import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import complete, cycle, random_graph
from pottstm.engine import (
    Engine, EngineConfig, EngineError, WeightedState, chromatic_polynomial, compute,
    coupling_to_v, potts_bivariate, potts_univariate, potts_value,
)
from pottstm.graph import Graph, disjoint_union, random_planar_graph
from pottstm.oracle import colouring_count, fk_brute_force
from pottstm.partition import SetPartition, bell
from pottstm.treedecomp import TreeDecomposition, greedy_fill_in, path_decomposition
from pottstm.weights import (
    Mode, Weight, evaluate, reduce_mod, specialise_v, weight_add, weight_mul,
)

B = Weight.bivariate
ONE = B([[1]])
V = B([[], [1]])
Q = B([[0, 1]])


def biv_engine(n=6, m=12, **kw):
    return Engine(EngineConfig(Mode.BIVARIATE, v=None, **kw), n, m)


def make_state(eng, scope, entries):
    table = {}
    for blocks, w in entries:
        table[SetPartition.from_blocks(blocks, scope).labels] = eng.ring.from_weight(w)
    return WeightedState(tuple(scope), table)


def read(eng, state):
    return {frozenset(map(frozenset, p.blocks())): w for p, w in eng.snapshot(state).items()}


def key(*blocks):
    return frozenset(map(frozenset, blocks))


def poly(*terms):
    """Sum of c * Q^k v^j for (c, k, j)."""
    w = B([])
    for c, k, j in terms:
        rows = [[] for _ in range(j)] + [[0] * k + [c]]
        w = weight_add(w, B(rows))
    return w


OMEGA1 = poly((1, 2, 0), (3, 1, 1), (3, 0, 2))
OMEGA2 = poly((1, 2, 1), (3, 1, 2), (4, 0, 3), (1, 0, 4))


# -- single operations


def test_edges_then_delete_reproduce_three_vertex_example():
    eng = biv_engine()
    s = eng.delete_and_insert(eng.empty_state(), (), (1, 2, 3))
    s = eng.apply_edge(s, 1, 2)
    s = eng.apply_edge(s, 1, 3)
    s = eng.delete_and_insert(s, (1,), ())
    assert read(eng, s) == {key([2], [3]): poly((1, 1, 0), (2, 0, 1)), key([2, 3]): poly((1, 0, 2))}


def test_insert_into_empty():
    eng = biv_engine()
    s = eng.delete_and_insert(eng.empty_state(), (), (0, 4))
    assert read(eng, s) == {key([0], [4]): ONE}


def test_edge_on_joined_entry_scales_by_one_plus_v():
    eng = biv_engine()
    s = make_state(eng, (0, 1), [([[0, 1]], Q)])
    assert read(eng, eng.apply_edge(s, 0, 1)) == {key([0, 1]): weight_mul(Q, weight_add(ONE, V))}


def test_scalar_v_zero_edge_is_identity():
    eng = Engine(EngineConfig(Mode.SCALAR, v=0.0, q=3.0), 2, 1)
    s = eng.delete_and_insert(eng.empty_state(), (), (0, 1))
    assert eng.apply_edge(s, 0, 1).table == s.table


def test_delete_singleton_gives_factor_q():
    eng = biv_engine()
    s = make_state(eng, (2, 3), [([[2], [3]], V)])
    assert read(eng, eng.delete_and_insert(s, (2,), ())) == {key([3]): weight_mul(V, Q)}


def test_operation_errors():
    eng = biv_engine()
    s = eng.delete_and_insert(eng.empty_state(), (), (0, 1))
    with pytest.raises(EngineError):
        eng.apply_edge(s, 0, 5)
    with pytest.raises(EngineError):
        eng.delete_and_insert(s, (7,), ())
    with pytest.raises(EngineError):
        eng.delete_and_insert(s, (), (1,))
    with pytest.raises(EngineError):
        eng.prune(s, set())


def test_fuse_identity_and_chain():
    eng = biv_engine()
    s = make_state(eng, (0, 1, 2), [([[0, 1], [2]], Q), ([[0], [1], [2]], V)])
    unit = eng.delete_and_insert(eng.empty_state(), (), (0, 1, 2))
    assert read(eng, eng.fuse(s, unit)) == read(eng, s)
    a = make_state(eng, (0, 1), [([[0, 1]], Q)])
    b = make_state(eng, (1, 2), [([[1, 2]], V)])
    assert read(eng, eng.fuse(a, b)) == {key([0, 1, 2]): weight_mul(Q, V)}


def test_fuse_central_bag_expansion():
    eng = biv_engine()
    states = [make_state(eng, sc, [([[x], [y]], OMEGA1), ([[x, y]], OMEGA2)])
              for sc, (x, y) in (((3, 4), (3, 4)), ((3, 5), (3, 5)), ((4, 5), (4, 5)))]
    fused = eng.fuse(eng.fuse(states[0], states[1]), states[2])
    w1, w2 = OMEGA1, OMEGA2
    cube = lambda a, b, c: weight_mul(weight_mul(a, b), c)
    expect = {
        key([3], [4], [5]): cube(w1, w1, w1),
        key([3, 4, 5]): weight_add(weight_mul(B([[3]]), cube(w1, w2, w2)), cube(w2, w2, w2)),
        key([3, 4], [5]): cube(w1, w1, w2),
        key([3], [4, 5]): cube(w1, w1, w2),
        key([3, 5], [4]): cube(w1, w1, w2),
    }
    assert read(eng, fused) == expect


def test_prune_rule():
    eng = Engine(EngineConfig(Mode.UNIVARIATE, v=-1, pruning=True), 4, 4)
    s = make_state(eng, (2, 3), [([[2, 3]], Weight.univariate([1])), ([[2], [3]], Weight.univariate([0, 1]))])
    pruned = eng.prune(s, {(2, 3)})
    assert list(pruned.table) == [(0, 1)]
    assert eng.prune(s, set()).table == s.table


def test_pruning_needs_v_minus_one():
    with pytest.raises(EngineError):
        EngineConfig(Mode.UNIVARIATE, v=2, pruning=True)
    with pytest.raises(EngineError):
        EngineConfig(Mode.BIVARIATE, v=None, pruning=True)


# -- whole runs


def test_worked_example_trace(example_graph, example_td):
    seen = {}

    def hook(bag, phase, snap):
        seen.setdefault((bag, phase), []).append(snap)

    res = compute(example_graph, EngineConfig(Mode.BIVARIATE, v=None, trace=hook), td=example_td)
    left = seen[(1, "exit")][-1]
    assert left.scope == (2, 3)
    assert left.weight_of([[2], [3]]) == OMEGA1
    assert left.weight_of([[2, 3]]) == OMEGA2
    central = seen[(2, "fused")][-1]
    assert central.weight_of([[2], [3], [4]]) == weight_mul(weight_mul(OMEGA1, OMEGA1), OMEGA1)
    assert res.weight == fk_brute_force(example_graph)


def test_triangle_chromatic():
    assert chromatic_polynomial(complete(3)).weight == Weight.univariate([0, 2, -3, 1])


def test_example_chromatic(example_graph):
    chi = chromatic_polynomial(example_graph).weight
    assert chi.coeffs == (0, 54, -243, 486, -567, 423, -207, 65, -12, 1)
    assert evaluate(chi, 3) == colouring_count(example_graph, 3)


@given(st.integers(0, 10**6), st.integers(1, 7), st.integers(0, 14))
def test_bivariate_matches_fk(seed, n, m):
    g = random_graph(random.Random(seed), n, m)
    assert potts_bivariate(g).weight == fk_brute_force(g)


@given(st.integers(0, 10**6), st.integers(1, 7), st.integers(0, 12),
       st.fractions(min_value=-3, max_value=3, max_denominator=5))
def test_rational_v_matches_fk(seed, n, m, v):
    g = random_graph(random.Random(seed), n, m)
    coeffs, _ = potts_univariate(g, v)
    expect = specialise_v(fk_brute_force(g), v)
    assert [Fraction(c) for c in coeffs] == [Fraction(c) for c in expect]


@given(st.integers(0, 10**6), st.integers(2, 7), st.integers(1, 12),
       st.floats(-1.0, 3.0), st.floats(0.1, 5.0))
def test_scalar_matches_exact(seed, n, m, v, q):
    g = random_graph(random.Random(seed), n, m)
    z = potts_value(g, q, v).weight.coeffs
    exact = evaluate(fk_brute_force(g), Fraction(q), Fraction(v))
    assert z == pytest.approx(float(exact), rel=1e-9, abs=1e-9 * float(abs(exact) + 1))


def test_coupling_zero_gives_q_power():
    g = cycle(5)
    assert coupling_to_v(0.0) == 0.0
    assert potts_value(g, 3.0, coupling_to_v(0.0)).weight.coeffs == 3.0**5


@pytest.mark.parametrize("seed", range(8))
def test_pruning_neutral_and_bounded(seed):
    g = random_planar_graph(25, seed)
    on = chromatic_polynomial(g, pruning=True)
    off = chromatic_polynomial(g, pruning=False)
    assert on.weight == off.weight
    assert on.stats.bell_exceeded == 0 and off.stats.bell_exceeded == 0
    assert on.stats.peak_table <= bell(on.stats.n_max)


@pytest.mark.parametrize("seed", range(6))
def test_modular_is_reduced_univariate(seed):
    g = random_planar_graph(18, seed)
    chi = chromatic_polynomial(g).weight
    for p in (2**31 - 1, 1_000_003, 101):
        res = compute(g, EngineConfig(Mode.MODULAR, v=-1, prime=p, pruning=True))
        assert res.weight == reduce_mod(chi, p)


def test_modular_point_evaluation(example_graph):
    chi = chromatic_polynomial(example_graph).weight
    p = 1_000_003
    res = compute(example_graph, EngineConfig(Mode.MODULAR, v=-1, q=123456, prime=p))
    assert res.weight.coeffs[0] == evaluate(chi, 123456) % p


def test_crt_equals_direct():
    g = random_planar_graph(30, 1)
    assert chromatic_polynomial(g, crt=True).weight == chromatic_polynomial(g).weight


def test_disjoint_union_multiplies():
    g, h = cycle(4), complete(4)
    both = potts_bivariate(disjoint_union(g, h)).weight
    assert both == weight_mul(potts_bivariate(g).weight, potts_bivariate(h).weight)


def test_isolated_vertices_and_empty_graph():
    assert chromatic_polynomial(Graph(3, [])).weight == Weight.univariate([0, 0, 0, 1])
    assert potts_bivariate(Graph(0, [])).weight == ONE


def test_decomposition_independence(example_graph, example_td):
    base = chromatic_polynomial(example_graph).weight
    assert chromatic_polynomial(example_graph, td=example_td).weight == base
    assert chromatic_polynomial(example_graph, td=path_decomposition(example_graph)).weight == base
    for r in range(example_td.n_bags):
        assert chromatic_polynomial(example_graph, td=example_td, root_choice=r).weight == base


def test_external_decomposition_must_be_valid(example_graph):
    bad = TreeDecomposition(((0, 1, 2),), (), 0)
    with pytest.raises(ValueError):
        chromatic_polynomial(example_graph, td=bad)


def test_stats_populated(example_graph):
    res = chromatic_polynomial(example_graph)
    st_ = res.stats
    assert st_.n_max == greedy_fill_in(example_graph).n_max
    assert st_.peak_table >= 1 and st_.seconds >= 0
