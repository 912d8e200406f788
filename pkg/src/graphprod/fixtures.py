"""Digraph fixture files and the bundled worked example.

A fixture is a JSON document::

    {"schema": "graphprod.digraph/1",
     "vertices": ["1", "2"],
     "edges": [{"src": "1", "dst": "2", "colour": "B", "label": "X1"}],
     "loops": {"1": "L1"},
     "colour_graph": {"colours": ["B"], "edges": []},   # optional
     "strings": {"s": ["B"]},                           # optional, string -> colours
     "expected": {...}}                                 # optional golden data

Labels are symbolic handles; numeric payloads are attached by the caller.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .combinat import Partition
from .digraphs import ColourGraph, Edge, StringAssignment, TestDigraph

__all__ = [
    "FixtureError",
    "Fixture",
    "parse_fixture",
    "load_fixture",
    "dump_fixture",
    "load_appendix_example",
    "named_partition",
    "verify_expected",
]

DIGRAPH_SCHEMA = "graphprod.digraph/1"


class FixtureError(ValueError):
    """Malformed fixture; ``path`` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class Fixture:
    name: str
    digraph: TestDigraph
    colour_graph: ColourGraph | None
    assignment: StringAssignment | None
    expected: dict[str, Any] = field(default_factory=dict)


def _require(doc: Mapping[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in doc:
        raise FixtureError(f"{where}{key}", "missing")
    if not isinstance(doc[key], kind):
        raise FixtureError(f"{where}{key}", f"expected {kind.__name__}")
    return doc[key]


def parse_fixture(doc: Mapping[str, Any]) -> Fixture:
    """Build digraph, colour graph and assignment from a parsed document."""
    if not isinstance(doc, Mapping):
        raise FixtureError("$", "expected an object")
    schema = doc.get("schema", DIGRAPH_SCHEMA)
    if schema != DIGRAPH_SCHEMA:
        raise FixtureError("schema", f"unsupported schema {schema!r}")
    names = [str(v) for v in _require(doc, "vertices", list, "")]
    if len(set(names)) != len(names):
        raise FixtureError("vertices", "duplicate vertex names")
    index = {v: i for i, v in enumerate(names)}
    edges = []
    for k, e in enumerate(_require(doc, "edges", list, "")):
        where = f"edges[{k}]."
        if not isinstance(e, Mapping):
            raise FixtureError(f"edges[{k}]", "expected an object")
        src, dst = str(_require(e, "src", (str, int), where)), str(_require(e, "dst", (str, int), where))
        for key, v in (("src", src), ("dst", dst)):
            if v not in index:
                raise FixtureError(where + key, f"unknown vertex {v!r}")
        colour = str(_require(e, "colour", str, where))
        label = e.get("label", f"X{k + 1}")
        eid = str(e.get("id", label if isinstance(label, str) else f"e{k}"))
        edges.append(Edge(index[src], index[dst], colour, label, eid))
    loops = {}
    for v, lab in (doc.get("loops") or {}).items():
        if str(v) not in index:
            raise FixtureError(f"loops.{v}", "unknown vertex")
        loops[index[str(v)]] = tuple(lab) if isinstance(lab, list) else lab
    try:
        T = TestDigraph(len(names), edges, loops, names)
    except ValueError as exc:
        raise FixtureError("edges", str(exc)) from None
    G = None
    if "colour_graph" in doc:
        cg = doc["colour_graph"]
        cols = _require(cg, "colours", list, "colour_graph.")
        try:
            G = ColourGraph.from_pairs([str(c) for c in cols], cg.get("edges", []))
        except ValueError as exc:
            raise FixtureError("colour_graph", str(exc)) from None
    A = None
    if "strings" in doc:
        colours = list(G.colours) if G is not None else sorted({e.colour for e in edges})
        try:
            A = StringAssignment.from_colours_of({str(s): list(cs) for s, cs in doc["strings"].items()}, colours)
        except ValueError as exc:
            raise FixtureError("strings", str(exc)) from None
    return Fixture(str(doc.get("name", "fixture")), T, G, A, dict(doc.get("expected", {})))


def load_fixture(path: str | Path) -> Fixture:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return parse_fixture(doc)


def dump_fixture(T: TestDigraph, G: ColourGraph | None = None, A: StringAssignment | None = None, name: str = "fixture") -> dict[str, Any]:
    doc: dict[str, Any] = {
        "schema": DIGRAPH_SCHEMA,
        "name": name,
        "vertices": list(T.names),
        "edges": [
            {"id": e.id, "src": T.names[e.src], "dst": T.names[e.dst], "colour": e.colour, "label": str(e.label)}
            for e in T.edges
        ],
        "loops": {T.names[v]: [str(x) for x in f] for v, f in sorted(T.loop_labels.items())},
    }
    if G is not None:
        doc["colour_graph"] = {"colours": list(G.colours), "edges": [list(p) for p in G.sorted_edges()]}
    if A is not None:
        doc["strings"] = {s: list(A.colours_of(s)) for s in A.strings}
    return doc


def named_partition(T: TestDigraph, blocks: list[list[str]]) -> Partition:
    """Partition of ``T``'s vertices given by blocks of vertex names."""
    return Partition(T.n_vertices, [[T.vertex(v) for v in b] for b in blocks])


def load_appendix_example() -> tuple[ColourGraph, StringAssignment, TestDigraph, dict[str, Any]]:
    """Six-vertex, eight-edge worked example on colours B, G, R with strings 1, 2, 3."""
    text = resources.files("graphprod.data").joinpath("appendix_example.json").read_text()
    fx = parse_fixture(json.loads(text))
    assert fx.colour_graph is not None and fx.assignment is not None
    return fx.colour_graph, fx.assignment, fx.digraph, fx.expected


def _gcc_table(T: TestDigraph, g) -> list[list]:
    counts: dict[tuple[str, str], int] = {}
    for a, b, _ in g.edges:
        key = (g.left[a], g.right_names[b])
        counts[key] = counts.get(key, 0) + 1
    return sorted([a, b, n] for (a, b), n in counts.items())


def verify_expected(fx: Fixture) -> list[tuple[str, bool, str]]:
    """Recompute every structure named in ``fx.expected`` and compare exactly.

    Returns ``(check, passed, detail)`` triples, one per expected key.
    """
    from .digraphs import colour_quotient, components, gcc, induced_gcc_walk, is_tree, pi_colour, rho_tuple, string_quotient
    from .combinat import PartitionTuple

    T, A, exp = fx.digraph, fx.assignment, fx.expected
    if not exp:
        return []
    if A is None:
        return [("expected_data", False, "golden data needs strings")]

    def blocks(p: Partition) -> list[list[str]]:
        return sorted(sorted(T.names[v] for v in b) for b in p.blocks)

    def norm(bs: list[list[str]]) -> list[list[str]]:
        return sorted(sorted(b) for b in bs)

    def tuple_from(doc: Mapping[str, Any]) -> PartitionTuple:
        return PartitionTuple(A.strings, tuple(named_partition(T, doc[s]) for s in A.strings))

    rho = rho_tuple(T, A)
    out: list[tuple[str, bool, str]] = []

    def record(name: str, bad: list) -> None:
        out.append((name, not bad, f"mismatch for {bad}" if bad else ""))

    for key, want in exp.items():
        if key == "rho":
            record(key, [s for s in A.strings if blocks(rho[s]) != norm(want[s])])
        elif key == "pi_colour_at_rho":
            record(key, [c for c, bs in want.items() if blocks(pi_colour(rho, A, c)) != norm(bs)])
        elif key == "colour_quotients_at_rho":
            bad = []
            for c, shp in want.items():
                Q = colour_quotient(T, A, rho, c)
                got = (Q.n_vertices, sorted(e.id for e in Q.edges), len(components(Q)))
                if got != (shp["vertices"], sorted(shp["edges"]), shp["components"]):
                    bad.append(c)
            record(key, bad)
        elif key == "string_quotients_at_rho":
            bad = []
            for s, shp in want.items():
                Q = string_quotient(T, A, rho, s)
                got = (Q.n_vertices, sorted(e.id for e in Q.edges), sorted(e.id for e in Q.edges if e.src == e.dst))
                if got != (shp["vertices"], sorted(shp["edges"]), sorted(shp["self_loops"])):
                    bad.append(s)
            record(key, bad)
        elif key == "gcc_at_rho":
            record(key, [s for s, rows in want.items() if _gcc_table(T, gcc(T, A, rho, s)) != sorted(list(r) for r in rows)])
        elif key == "gcc_is_tree_at_rho":
            record(key, [s for s, v in want.items() if is_tree(gcc(T, A, rho, s)) != v])
        elif key == "gcc_is_tree_at_sigma":
            sigma = tuple_from(exp["sigma"])
            record(key, [s for s, v in want.items() if is_tree(gcc(T, A, sigma, s)) != v])
        elif key == "induced_walks_at_rho":
            bad = []
            for s, w in want.items():
                nodes, edges = induced_gcc_walk(T, A, rho, s, exp["walk"])
                g = gcc(T, A, rho, s)
                names = [g.left[i] if side == "L" else g.right_names[g.right.index(i)] for side, i in nodes]
                got_edges = [[c, colour_quotient(T, A, rho, c).names[v]] for c, v in edges]
                if names != w["nodes"] or got_edges != [list(e) for e in w["edges"]]:
                    bad.append(s)
            record(key, bad)
        elif key in ("sigma", "walk"):
            continue
        else:
            out.append((key, False, "unknown expected key"))
    return out
