from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphprod.combinat import Partition, PartitionTuple
from graphprod.digraphs import (
    ColourGraph,
    Edge,
    StringAssignment,
    TestDigraph,
    build_string_assignment,
    colour_quotient,
    components,
    gcc,
    is_g_reduced,
    is_tree,
    leaf_count,
    minimize_strings,
    quotient,
    rho,
    rho_tuple,
    string_quotient,
    two_edge_connected,
)


def n_components(n, pairs):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    return len({find(v) for v in range(n)})


@st.composite
def multigraphs(draw, max_vertices=6, max_edges=8):
    n = draw(st.integers(1, max_vertices))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=max_edges))
    return TestDigraph(n, [Edge(a, b, "B", f"X{k}", f"e{k}") for k, (a, b) in enumerate(pairs)])


def brute_bridges(T):
    """An edge is a bridge iff deleting it increases the number of components."""
    pairs = [(e.src, e.dst) for e in T.edges]
    base = n_components(T.n_vertices, pairs)
    return {e.id for k, e in enumerate(T.edges) if n_components(T.n_vertices, pairs[:k] + pairs[k + 1 :]) > base}


def brute_leaf_count(T):
    """Contract the components of the bridgeless graph and count forest leaves (isolated nodes count 2)."""
    bridges = brute_bridges(T)
    keep = [(e.src, e.dst) for e in T.edges if e.id not in bridges]
    parent = list(range(T.n_vertices))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in keep:
        parent[find(a)] = find(b)
    nodes = {find(v) for v in range(T.n_vertices)}
    deg = {v: 0 for v in nodes}
    for e in T.edges:
        if e.id in bridges:
            deg[find(e.src)] += 1
            deg[find(e.dst)] += 1
    return sum(1 for v in nodes if deg[v] == 1) + 2 * sum(1 for v in nodes if deg[v] == 0)


@given(multigraphs())
@settings(max_examples=300, deadline=None)
def test_cut_edges_match_deletion_oracle(T):
    assert set(two_edge_connected(T).cut_edges) == brute_bridges(T)


@given(multigraphs())
@settings(max_examples=300, deadline=None)
def test_leaf_count_matches_forest_oracle(T):
    assert leaf_count(T) == brute_leaf_count(T)


def test_leaf_count_examples():
    single = TestDigraph(1, [])
    assert leaf_count(single) == 2
    path = TestDigraph(3, [(0, 1, "B", "X"), (1, 2, "B", "Y")])
    assert leaf_count(path) == 2
    cycle = TestDigraph(3, [(0, 1, "B", "X"), (1, 2, "B", "Y"), (2, 0, "B", "Z")])
    assert leaf_count(cycle) == 2 and not two_edge_connected(cycle).cut_edges
    double = TestDigraph(2, [(0, 1, "B", "X"), (1, 0, "B", "Y")])
    assert not two_edge_connected(double).cut_edges
    star = TestDigraph(4, [(0, 1, "B", "X"), (0, 2, "B", "Y"), (0, 3, "B", "Z")])
    assert leaf_count(star) == 3


@given(multigraphs(), st.data())
@settings(max_examples=100, deadline=None)
def test_quotient_keeps_edges_and_merges_vertices(T, data):
    labels = data.draw(st.lists(st.integers(0, T.n_vertices - 1), min_size=T.n_vertices, max_size=T.n_vertices))
    p = Partition.from_labels(labels)
    Q = quotient(T, p)
    assert Q.n_vertices == len(p)
    assert [e.id for e in Q.edges] == [e.id for e in T.edges]
    for e, f in zip(T.edges, Q.edges):
        assert f.src == p.labels[e.src] and f.dst == p.labels[e.dst]
    assert n_components(Q.n_vertices, [(e.src, e.dst) for e in Q.edges]) == len(components(Q))


def test_quotient_concatenates_loop_labels():
    T = TestDigraph(3, [(0, 1, "B", "X")], {0: "L0", 2: ("L2a", "L2b")})
    Q = quotient(T, Partition(3, [[0, 2], [1]]))
    assert Q.loop_labels == {0: ("L0", "L2a", "L2b")}
    assert Q.names == ("{0,2}", "1")


def test_colour_graph_rejects_self_loops_and_unknown_colours():
    with pytest.raises(ValueError):
        ColourGraph.from_pairs(["B"], [["B", "B"]])
    with pytest.raises(ValueError):
        ColourGraph.from_pairs(["B"], [["B", "R"]])


def test_empty_string_set_rejected():
    with pytest.raises(ValueError):
        StringAssignment.from_colours_of({"1": ["B"]}, ["B", "G"])


@st.composite
def colour_graphs(draw):
    k = draw(st.integers(1, 6))
    cs = [f"c{i}" for i in range(k)]
    pairs = [p for p in itertools.combinations(cs, 2) if draw(st.booleans())]
    return ColourGraph.from_pairs(cs, pairs)


@given(colour_graphs())
@settings(max_examples=200, deadline=None)
def test_string_constructions_realise_the_colour_graph(G):
    for A in (build_string_assignment(G), minimize_strings(G)):
        assert A.check(G) == []
        assert A.induced_graph() == G
    assert len(minimize_strings(G).strings) <= len(build_string_assignment(G).strings)


def test_appendix_colour_graph_strings():
    G = ColourGraph.from_pairs(["B", "G", "R"], [["B", "R"]])
    A = minimize_strings(G)
    assert A.check(G) == []
    assert [A.colours_of(s) for s in A.strings] == [("B", "G"), ("G", "R")]


def test_check_reports_wrong_overlaps():
    G = ColourGraph.from_pairs(["B", "R"], [["B", "R"]])
    A = StringAssignment.from_colours_of({"1": ["B", "R"]})
    assert A.check(G) and not A.is_valid_for(G)


@pytest.mark.parametrize(
    "word, edges, expected",
    [
        (["B", "R", "B"], [], True),
        (["B", "R", "B"], [["B", "R"]], False),
        (["B", "B"], [], False),
        (["B", "G", "R", "B"], [["B", "R"]], True),
        (["B", "R", "G", "R"], [["B", "R"]], True),
        (["B"], [], True),
    ],
)
def test_reduced_words(word, edges, expected):
    G = ColourGraph.from_pairs(["B", "G", "R"], edges)
    assert is_g_reduced(word, G) == expected


def test_rho_uses_edges_avoiding_the_string():
    # colour B on string 1 only; G on both strings
    A = StringAssignment.from_colours_of({"1": ["B", "G"], "2": ["G"]})
    T = TestDigraph(3, [(0, 1, "B", "X"), (1, 2, "G", "Y")])
    assert rho(T, A, "1") == Partition.bottom(3)
    assert rho(T, A, "2") == Partition(3, [[0, 1], [2]])


def test_gcc_rejects_pi_below_rho():
    A = StringAssignment.from_colours_of({"1": ["B", "G"], "2": ["G"]})
    T = TestDigraph(3, [(0, 1, "B", "X"), (1, 2, "G", "Y")])
    pi = PartitionTuple(("1", "2"), (Partition.bottom(3), Partition.bottom(3)))
    with pytest.raises(ValueError):
        gcc(T, A, pi, "2")


def test_gcc_of_a_tree_digraph_is_a_tree():
    A = StringAssignment.from_colours_of({"1": ["B", "G"]})
    T = TestDigraph(3, [(0, 1, "B", "X"), (1, 2, "G", "Y")])
    r = rho_tuple(T, A)
    g = gcc(T, A, r, "1")
    # left: 3 vertices; right: B-component {0,1}, B-singleton {2}, G-singleton {0}, G-component {1,2}
    assert len(g.left) == 3 and len(g.right) == 4 and len(g.edges) == 6
    assert is_tree(g)


def test_two_parallel_edges_give_a_non_tree():
    A = StringAssignment.from_colours_of({"1": ["B", "G"]})
    T = TestDigraph(2, [(0, 1, "B", "X"), (0, 1, "G", "Y")])
    assert not is_tree(gcc(T, A, rho_tuple(T, A), "1"))


def test_colour_and_string_quotients_shapes():
    A = StringAssignment.from_colours_of({"1": ["B"], "2": ["B", "G"]})
    T = TestDigraph(3, [(0, 1, "B", "X"), (1, 2, "G", "Y")])
    r = rho_tuple(T, A)
    assert string_quotient(T, A, r, "1").shape() == (2, 1)
    assert colour_quotient(T, A, r, "G").shape() == (3, 1)
