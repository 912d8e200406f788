from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from conftest import brute_injective, brute_trace, random_digraph, random_payloads
from graphprod.combinat import Partition, PartitionTuple, enumerate_partitions, leq
from graphprod.digraphs import ColourGraph, Edge, StringAssignment, TestDigraph, components, gcc, is_tree, minimize_strings, quotient, rho
from graphprod.traffic import (
    attach_word_payloads,
    build_centered_product_graph,
    centered_norm_direct,
    centered_norm_expansion,
    enumerate_partition_tuples,
    expected_gamma,
    expected_trace,
    gamma,
    inconsistency_search,
    kernel_map_count,
    lambda_weight,
    leafcount_exponent,
    mingo_speicher_bound,
    permutation_average,
    raw_injective_trace,
    raw_trace,
    trace_tau,
    trace_tau_injective,
)


def random_assignment(rng) -> StringAssignment:
    if rng.random() < 0.4:
        return StringAssignment.from_colours_of({"1": ["B", "G", "R"]})
    g = [["1"], ["2"], ["1", "2"]][int(rng.integers(3))]
    cols = {"1": ["B"], "2": ["R"]}
    for s in g:
        cols[s].append("G")
    return StringAssignment.from_colours_of(cols)


def brute_lift(X, support, strings, N):
    """Entry ``[a, b]`` is ``X`` on the support legs times a delta on the other legs."""
    m = len(strings)
    pos = [strings.index(s) for s in support]
    tuples = list(itertools.product(range(N), repeat=m))
    flat = lambda t: sum(t[p] * N ** (len(pos) - 1 - k) for k, p in enumerate(pos))
    out = np.zeros((N**m, N**m), dtype=complex)
    for a, ta in enumerate(tuples):
        for b, tb in enumerate(tuples):
            if all(ta[q] == tb[q] for q in range(m) if q not in pos):
                out[a, b] = X[flat(ta), flat(tb)]
    return out


def brute_ambient(T, A, N, perms):
    mats = {}
    for e in T.edges:
        X = np.asarray(T.payloads[e.label])
        if perms is not None:
            s = perms[e.colour]
            X = np.array([[X[s[i], s[j]] for j in range(len(s))] for i in range(len(s))])
        mats[e.id] = brute_lift(X, A.strings_of(e.colour), list(A.strings), N)
    return mats


def random_perms(rng, A, N):
    return {c: rng.permutation(N ** len(A.strings_of(c))) for c in A.colours}


def test_four_cycle_is_normalised_trace(rng):
    N = 3
    A_, B_, C_, D_ = (rng.normal(size=(N, N)) for _ in range(4))
    T = TestDigraph(4, [(1, 0, "B", "A"), (2, 1, "B", "B"), (3, 2, "B", "C"), (0, 3, "B", "D")])
    T = T.with_payloads({"A": A_, "B": B_, "C": C_, "D": D_})
    assert trace_tau(T, N) == pytest.approx(np.trace(A_ @ B_ @ C_ @ D_) / N, rel=1e-12)


def test_disconnected_digraph_normalises_per_component(rng):
    N = 3
    X, Y = rng.normal(size=(N, N)), rng.normal(size=(N, N))
    T = TestDigraph(3, [(0, 0, "B", "X"), (1, 2, "B", "Y")]).with_payloads({"X": X, "Y": Y})
    assert trace_tau(T, N) == pytest.approx(np.trace(X) / N * Y.sum() / N, rel=1e-12)


def test_trace_matches_explicit_index_sum(rng):
    for _ in range(25):
        A = random_assignment(rng)
        N = int(rng.integers(1, 3)) + 1
        T = random_payloads(rng, random_digraph(rng, 3, A.colours, 4), A, N)
        perms = random_perms(rng, A, N) if rng.random() < 0.5 else None
        M = N ** len(A.strings)
        v = int(rng.integers(T.n_vertices))
        d = rng.normal(size=M)
        T = T.with_loops({v: "L"}).with_payloads({"L": d})
        expected = brute_trace(T, M, brute_ambient(T, A, N, perms), {v: d}) / M ** len(components(T))
        assert trace_tau(T, N, A, perms) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_injective_methods_agree_with_explicit_sum(rng):
    for _ in range(25):
        N = int(rng.integers(2, 5))
        T = random_payloads(rng, random_digraph(rng, 4, ["B"], 5), None, N)
        mats = {e.id: T.payloads[e.label] for e in T.edges}
        expected = brute_injective(T, N, mats)
        for method in ("enumerate", "moebius"):
            assert raw_injective_trace(T, N, method=method) == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_full_sum_splits_over_vertex_partitions(rng):
    for _ in range(20):
        N = int(rng.integers(2, 4))
        T = random_payloads(rng, random_digraph(rng, 4, ["B"], 5), None, N)
        total = sum(raw_injective_trace(quotient(T, p), N, method="enumerate") for p in enumerate_partitions(T.n_vertices))
        assert raw_trace(T, N) == pytest.approx(total, rel=1e-10, abs=1e-10)


def test_injective_trace_vanishes_when_too_many_vertices(rng):
    T = random_payloads(rng, TestDigraph(3, [(0, 1, "B", "X"), (1, 2, "B", "Y")]), None, 2)
    assert trace_tau_injective(T, 2) == 0


def test_kernel_expansion_recovers_the_trace(rng):
    for _ in range(15):
        A = random_assignment(rng)
        N = int(rng.integers(2, 4))
        T = random_payloads(rng, random_digraph(rng, 3, A.colours, 3), A, N)
        perms = random_perms(rng, A, N)
        bottoms = [Partition.bottom(T.n_vertices)] * len(A.strings)
        total = 0j
        count = 0
        for pi in enumerate_partition_tuples(A.strings, bottoms):
            g = gamma(T, A, pi, N, perms)
            if not all(leq(rho(T, A, s), pi[s]) for s in A.strings):
                assert g == 0
            total += g
            count += 1
        assert count == math.prod(len(list(enumerate_partitions(T.n_vertices))) for _ in A.strings)
        assert trace_tau(T, N, A, perms) == pytest.approx(total, rel=1e-10, abs=1e-12)


def test_kernel_map_count():
    pi = PartitionTuple(("1", "2"), (Partition(3, [[0, 1], [2]]), Partition.top(3)))
    assert kernel_map_count(pi, 4) == 12 * 4


def test_lambda_weight_without_loops_is_the_map_fraction():
    A = StringAssignment.from_colours_of({"1": ["B"]})
    T = TestDigraph(2, [(0, 1, "B", "X")])
    pi = PartitionTuple(("1",), (Partition.bottom(2),))
    assert lambda_weight(T, A, pi, 3) == pytest.approx(6 / 9)


def test_lambda_weight_single_vertex_is_normalised_trace(rng):
    A = StringAssignment.from_colours_of({"1": ["B"]})
    d = rng.normal(size=4)
    T = TestDigraph(1, [], {0: "L"}).with_payloads({"L": d})
    pi = PartitionTuple(("1",), (Partition.bottom(1),))
    assert lambda_weight(T, A, pi, 4) == pytest.approx(d.mean())


def test_lambda_weight_bounded_by_loop_norms(rng):
    A = StringAssignment.from_colours_of({"1": ["B"], "2": ["B"]})
    N, R = 2, 1.5
    T = TestDigraph(3, [], {v: f"L{v}" for v in range(3)})
    T = T.with_payloads({f"L{v}": rng.uniform(-R, R, size=N * N) for v in range(3)})
    for pi in enumerate_partition_tuples(A.strings, [Partition.bottom(3)] * 2):
        assert abs(lambda_weight(T, A, pi, N)) <= R**3


def test_expected_gamma_is_the_permutation_average_of_gamma(rng):
    A = StringAssignment.from_colours_of({"1": ["B", "R"]})
    T = TestDigraph(3, [(0, 1, "B", "X"), (1, 2, "R", "Y"), (2, 0, "B", "Z")])
    T = random_payloads(rng, T, A, 3)
    for pi in enumerate_partition_tuples(A.strings, [rho(T, A, "1")]):
        avg = np.mean([gamma(T, A, pi, 3, {"B": p, "R": q})
                       for p in itertools.permutations(range(3)) for q in itertools.permutations(range(3))])
        assert expected_gamma(T, A, pi, 3) == pytest.approx(avg, rel=1e-10, abs=1e-12)


def test_two_cycle_expected_trace_frozen_values():
    # tr(AB)/N averaged over the four pairs of permutations of two indices: (9 + 6 + 6 + 9) / 4 / 2
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    Y = np.array([[0.0, 1.0], [1.0, 1.0]])
    T = TestDigraph(2, [(0, 1, "B", "X"), (1, 0, "R", "Y")]).with_payloads({"X": X, "Y": Y})
    one = StringAssignment.from_colours_of({"1": ["B", "R"]})
    assert expected_trace(T, one, 2).value == pytest.approx(3.75, abs=1e-12)
    assert permutation_average(T, one, 2) == pytest.approx(3.75, abs=1e-12)
    # on separate strings the two labels act on different legs: tr X tr Y / 4
    two = StringAssignment.from_colours_of({"1": ["B"], "2": ["R"]})
    assert expected_trace(T.with_payloads({"X": X, "Y": Y}), two, 2).value == pytest.approx(1.25, abs=1e-12)


def test_expected_trace_matches_exhaustive_average(rng):
    for A in (StringAssignment.from_colours_of({"1": ["B", "R"]}), StringAssignment.from_colours_of({"1": ["B", "G"], "2": ["G", "R"]})):
        for _ in range(4):
            T = random_payloads(rng, random_digraph(rng, 3, A.colours, 3, connected=True), A, 2)
            assert expected_trace(T, A, 2).value == pytest.approx(permutation_average(T, A, 2), rel=1e-12, abs=1e-12)


def test_leading_mode_needs_two_edge_connected():
    A = StringAssignment.from_colours_of({"1": ["B"]})
    T = TestDigraph(2, [(0, 1, "B", "X")]).with_payloads({"X": np.eye(2)})
    with pytest.raises(ValueError):
        expected_trace(T, A, 2, mode="leading")


def test_leading_term_error_shrinks_with_n(rng):
    A = StringAssignment.from_colours_of({"1": ["B", "R"]})
    T = TestDigraph(2, [(0, 1, "B", "X"), (1, 0, "R", "Y")])
    errs = []
    for N in (2, 4, 8, 16):
        # unitary labels keep every norm equal to one as N grows
        X = np.linalg.qr(rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N)))[0]
        Y = np.linalg.qr(rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N)))[0]
        T = T.with_payloads({"X": X, "Y": Y})
        exact = expected_trace(T, A, N).value
        lead = expected_trace(T, A, N, mode="leading")
        assert lead.dropped_terms.get("gcc-not-tree", 0) > 0
        errs.append(abs(exact - lead.value))
    assert all(e <= 4 / N for e, N in zip(errs, (2, 4, 8, 16)))


def random_two_edge_connected(rng, n):
    edges = [(v, (v + 1) % n) for v in range(n)] if n > 1 else [(0, 0)]
    for _ in range(int(rng.integers(0, 3))):
        edges.append((int(rng.integers(n)), int(rng.integers(n))))
    cols = ["B", "G", "R"]
    return TestDigraph(n, [Edge(a, b, cols[int(rng.integers(3))], f"X{k}", f"e{k}") for k, (a, b) in enumerate(edges)])


def test_leafcount_exponent_nonpositive_and_tight_exactly_on_trees(rng):
    G = ColourGraph.from_pairs(["B", "G", "R"], [["B", "R"]])
    A = minimize_strings(G)
    for _ in range(10):
        T = random_two_edge_connected(rng, int(rng.integers(1, 5)))
        for pi in enumerate_partition_tuples(A.strings, [rho(T, A, s) for s in A.strings]):
            e = leafcount_exponent(T, A, pi)
            trees = all(is_tree(gcc(T, A, pi, s)) for s in A.strings)
            assert e <= 0
            assert (e == 0) == trees


def test_mingo_speicher_bound_on_a_cycle(rng):
    N = 4
    mats = [rng.normal(size=(N, N)) for _ in range(3)]
    T = TestDigraph(3, [(1, 0, "B", "a"), (2, 1, "B", "b"), (0, 2, "B", "c")]).with_payloads(dict(zip("abc", mats)))
    norms = {e.id: np.linalg.norm(m, 2) for e, m in zip(T.edges, mats)}
    assert abs(trace_tau(T, N)) <= mingo_speicher_bound(T, N, norms)
    with pytest.raises(ValueError):
        mingo_speicher_bound(T, N, {k: -1.0 for k in norms})


def word_payloads(rng, cpg, A, N):
    X = {}
    for i, (c, l) in enumerate(cpg.word, start=1):
        d = N ** len(A.strings_of(c))
        for j in range(1, l + 1):
            X[(i, j)] = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return X


@pytest.mark.parametrize("word", [[("B", 1), ("R", 1)], [("B", 2), ("R", 1)], [("B", 1), ("G", 1), ("B", 1)]])
def test_centered_norm_expansion_matches_matrix_product(rng, word):
    A = StringAssignment.from_colours_of({"1": ["B", "G"], "2": ["G", "R"]})
    N = 2
    cpg = build_centered_product_graph(word)
    cpg = attach_word_payloads(cpg, word_payloads(rng, cpg, A, N))
    perms = random_perms(rng, A, N)
    exp = centered_norm_expansion(cpg, N, A, perms)
    assert exp.real == pytest.approx(centered_norm_direct(cpg, N, A, perms), rel=1e-9, abs=1e-12)
    assert abs(exp.imag) < 1e-9


def test_centered_norm_with_loop_diagonals(rng):
    N = 3
    word = [("B", 1), ("B", 2)]
    cpg = build_centered_product_graph(word, loop_labels={})
    X = {(1, 1): rng.normal(size=(N, N)), (2, 1): rng.normal(size=(N, N)), (2, 2): rng.normal(size=(N, N))}
    L = {key: rng.normal(size=N) for key in X}
    cpg = attach_word_payloads(cpg, X, L)
    Y1 = np.diag(L[(1, 1)]) @ X[(1, 1)]
    Y2 = np.diag(L[(2, 1)]) @ X[(2, 1)] @ np.diag(L[(2, 2)]) @ X[(2, 2)]
    c = lambda Y: Y - np.diag(np.diag(Y))
    expected = np.mean(np.abs(np.diag(c(Y1) @ c(Y2))) ** 2)
    assert centered_norm_direct(cpg, N) == pytest.approx(expected, rel=1e-12)
    assert centered_norm_expansion(cpg, N).real == pytest.approx(expected, rel=1e-9)


def test_centered_graph_shape():
    cpg = build_centered_product_graph([("B", 2), ("R", 1), ("B", 1)])
    assert cpg.digraph.shape() == (7, 8)
    assert cpg.anchors[0] == cpg.mirror_anchors[0] == 0
    with pytest.raises(ValueError):
        build_centered_product_graph([("B", 0)])


def test_inconsistency_search_finds_nothing_for_reduced_words():
    G = ColourGraph.from_pairs(["B", "G", "R"], [["B", "R"]])
    A = minimize_strings(G)
    for word in (["B", "G"], ["B", "G", "R"], ["G", "B", "G"]):
        n, bad = inconsistency_search(build_centered_product_graph([(c, 1) for c in word]), A)
        assert n > 0 and bad == []


def test_inconsistency_search_is_not_vacuous():
    A = StringAssignment.from_colours_of({"1": ["B"]})
    n, bad = inconsistency_search(build_centered_product_graph([("B", 1), ("B", 1)]), A)
    assert bad
