import itertools
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from structbench.graphs import (GraphError, LabeledGraph, cpdag, has_directed_cycle, is_chordal, is_dag,
                                max_cardinality_search, meek_closure, pattern_graph, skeleton,
                                topological_order, v_structures)
from structbench.netgen import BandSpec, gen_bandmat, gen_rand_bandmat

from conftest import all_dags, dags, undirected_graphs


def equivalence_oracle(graphs):
    """Group DAGs by (skeleton, v-structures) and mark an edge directed iff all members agree."""
    classes = defaultdict(list)
    for g in graphs:
        key = (skeleton(g).adj.tobytes(), frozenset(v_structures(g)))
        classes[key].append(g)
    expected = {}
    for members in classes.values():
        union = np.zeros_like(members[0].adj)
        for m in members:
            union |= m.adj
        for m in members:
            expected[m] = union
    return expected, classes


def has_chordless_cycle(g):
    """Brute force: some vertex subset of size >= 4 induces a single cycle."""
    for k in range(4, g.p + 1):
        for sub in itertools.combinations(range(g.p), k):
            a = g.adj[np.ix_(sub, sub)]
            if not np.all(a.sum(axis=0) == 2):
                continue
            # connected 2-regular graph = one cycle
            seen, stack = {0}, [0]
            while stack:
                v = stack.pop()
                for w in np.nonzero(a[v])[0]:
                    if w not in seen:
                        seen.add(int(w))
                        stack.append(int(w))
            if len(seen) == k:
                return True
    return False


def test_invalid_matrices_rejected():
    with pytest.raises(GraphError):
        LabeledGraph(("a", "b"), [[1, 0], [0, 0]])
    with pytest.raises(GraphError):
        LabeledGraph(("a", "b"), [[0, 2], [0, 0]])
    with pytest.raises(GraphError):
        LabeledGraph(("a", "a"), [[0, 1], [0, 0]])
    with pytest.raises(GraphError):
        LabeledGraph(("a", "b", "c"), np.zeros((2, 2)))


def test_adjacency_is_read_only():
    g = LabeledGraph.from_edges("abc", directed=[("a", "b")])
    with pytest.raises(ValueError):
        g.adj[0, 1] = 0


def test_edge_kinds_and_counts():
    g = LabeledGraph.from_edges("abcd", directed=[("a", "b")], undirected=[("c", "d")])
    assert g.directed_edges() == [(0, 1)]
    assert g.undirected_edges() == [(2, 3)]
    assert g.n_edges() == 2
    assert g.parents(1) == [0]
    assert not is_dag(g)


@given(dags())
def test_topological_order_respects_edges(g):
    order = topological_order(g)
    pos = {v: k for k, v in enumerate(order)}
    assert sorted(order) == list(range(g.p))
    for i, j in g.directed_edges():
        assert pos[i] < pos[j]


def test_cycle_detected():
    g = LabeledGraph.from_edges("abc", directed=[("a", "b"), ("b", "c"), ("c", "a")])
    assert has_directed_cycle(g)
    assert not is_dag(g)
    with pytest.raises(GraphError):
        topological_order(g)


def test_pattern_keeps_only_v_structures():
    # a -> c <- b, c -> d
    g = LabeledGraph.from_edges("abcd", directed=[("a", "c"), ("b", "c"), ("c", "d")])
    pat = pattern_graph(g)
    assert set(pat.directed_edges()) == {(0, 2), (1, 2)}
    assert pat.undirected_edges() == [(2, 3)]
    # Meek R1 then orients c -> d
    assert set(cpdag(g).directed_edges()) == {(0, 2), (1, 2), (2, 3)}


def test_chain_cpdag_fully_undirected():
    g = LabeledGraph.from_edges("abc", directed=[("a", "b"), ("b", "c")])
    assert cpdag(g).undirected_edges() == [(0, 1), (1, 2)]


def test_pattern_rejects_non_dag():
    with pytest.raises(GraphError):
        pattern_graph(LabeledGraph.from_edges("ab", undirected=[("a", "b")]))


def test_cpdag_matches_equivalence_oracle_on_all_3_node_dags():
    graphs = all_dags(3)
    assert len(graphs) == 25
    expected, classes = equivalence_oracle(graphs)
    assert len(classes) == 11
    for g in graphs:
        assert np.array_equal(cpdag(g).adj, expected[g])


@given(dags(max_p=6))
@settings(max_examples=150)
def test_cpdag_properties(g):
    c = cpdag(g)
    # same skeleton, v-structures kept, directed part acyclic, undirected part chordal
    assert np.array_equal(skeleton(c).adj, skeleton(g).adj)
    for i, k, j in v_structures(g):
        assert c.adj[i, k] == 1 and c.adj[k, i] == 0
        assert c.adj[j, k] == 1 and c.adj[k, j] == 0
    assert not has_directed_cycle(c)
    und = c.adj & c.adj.T
    assert is_chordal(LabeledGraph(c.labels, und))
    # every directed edge of the CPDAG agrees with the DAG
    for i, j in c.directed_edges():
        assert g.adj[i, j] == 1


@given(dags(max_p=6), st.randoms(use_true_random=False))
@settings(max_examples=100)
def test_meek_fixpoint_independent_of_node_order(g, rnd):
    perm = list(range(g.p))
    rnd.shuffle(perm)
    direct = meek_closure(pattern_graph(g).adj)
    permuted = meek_closure(pattern_graph(g.relabel(perm)).adj)
    inv = np.argsort(perm)
    assert np.array_equal(permuted[np.ix_(inv, inv)], direct)


@given(dags(max_p=6))
def test_meek_closure_is_idempotent(g):
    once = meek_closure(pattern_graph(g).adj)
    assert np.array_equal(meek_closure(once), once)


@given(undirected_graphs(max_p=7))
@settings(max_examples=200)
def test_is_chordal_matches_brute_force(g):
    assert is_chordal(g) == (not has_chordless_cycle(g))


def test_chordality_examples():
    square = LabeledGraph.from_edges("abcd", undirected=[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
    assert not is_chordal(square)
    chorded = LabeledGraph.from_edges("abcd", undirected=[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"),
                                                          ("a", "c")])
    assert is_chordal(chorded)
    assert is_chordal(LabeledGraph.empty("abc"))
    with pytest.raises(GraphError):
        is_chordal(LabeledGraph.from_edges("ab", directed=[("a", "b")]))


def test_mcs_visits_every_node_once():
    g = gen_bandmat(BandSpec(6, 2))
    order = max_cardinality_search(g)
    assert sorted(order) == list(range(6))


@given(st.integers(1, 12), st.integers(0, 11), st.integers(0, 2**32))
def test_band_graphs_are_chordal(p, width, seed):
    width = min(width, p - 1)
    assert is_chordal(gen_bandmat(BandSpec(p, width)))
    assert is_chordal(gen_rand_bandmat(BandSpec(p, width, seed)))
