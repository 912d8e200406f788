"""Shared helpers for the test suite."""
from __future__ import annotations

import itertools

import numpy as np
import pytest

from graphprod.digraphs import Edge, StringAssignment, TestDigraph

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def random_digraph(rng: np.random.Generator, max_vertices: int, colours, max_edges: int = 5, connected: bool = False) -> TestDigraph:
    """Random coloured multigraph; with ``connected`` a spanning path comes first."""
    n = int(rng.integers(1, max_vertices + 1))
    edges = []
    if connected:
        order = rng.permutation(n)
        for a, b in zip(order, order[1:]):
            if rng.random() < 0.5:
                a, b = b, a
            edges.append((int(a), int(b)))
    extra = int(rng.integers(0 if edges else 1, max(1, max_edges - len(edges)) + 1))
    for _ in range(extra):
        edges.append((int(rng.integers(n)), int(rng.integers(n))))
    es = [Edge(a, b, str(colours[int(rng.integers(len(colours)))]), f"X{k}", f"e{k}") for k, (a, b) in enumerate(edges)]
    return TestDigraph(n, es)


def random_payloads(rng: np.random.Generator, T: TestDigraph, A: StringAssignment | None, N: int, complex_: bool = True) -> TestDigraph:
    pay = {}
    for e in T.edges:
        d = N if A is None else N ** len(A.strings_of(e.colour))
        X = rng.normal(size=(d, d))
        if complex_:
            X = X + 1j * rng.normal(size=(d, d))
        pay[e.label] = X
    return T.with_payloads(pay)


def brute_trace(T: TestDigraph, M: int, mats: dict, loops: dict | None = None) -> complex:
    """Sum over every map ``V -> [M]`` of the product of edge entries, by explicit loops."""
    total = 0j
    for i in itertools.product(range(M), repeat=T.n_vertices):
        val = 1 + 0j
        for e in T.edges:
            val *= mats[e.id][i[e.dst], i[e.src]]
        for v, d in (loops or {}).items():
            val *= d[i[v]]
        total += val
    return total


def brute_injective(T: TestDigraph, M: int, mats: dict) -> complex:
    total = 0j
    for i in itertools.permutations(range(M), T.n_vertices):
        val = 1 + 0j
        for e in T.edges:
            val *= mats[e.id][i[e.dst], i[e.src]]
        total += val
    return total


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
