"""Coloured test digraphs, string assignments and the component graphs built on them.

Connectivity notions here are always weak: orientation is ignored when
computing components and cut edges.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Any, Hashable, Iterable, Mapping, Sequence

from .combinat import Partition, PartitionTuple, leq, meet

__all__ = [
    "Edge",
    "TestDigraph",
    "ColourGraph",
    "StringAssignment",
    "TwoEdgeConnected",
    "BipartiteMultigraph",
    "components",
    "quotient",
    "restrict_colours",
    "rho",
    "rho_tuple",
    "pi_colour",
    "colour_quotient",
    "string_quotient",
    "two_edge_connected",
    "leaf_count",
    "gcc",
    "is_tree",
    "induced_gcc_walk",
    "is_g_reduced",
    "build_string_assignment",
    "minimize_strings",
]


@dataclass(frozen=True)
class Edge:
    """Directed edge ``src -> dst``; ``id`` is stable under quotients and restrictions."""

    src: int
    dst: int
    colour: str
    label: Hashable
    id: str


def _as_factors(x: Any) -> tuple:
    if x is None:
        return ()
    if isinstance(x, tuple):
        return x
    return (x,)


class TestDigraph:
    """Finite directed multigraph with coloured, labelled edges.

    Vertices are ``0..n_vertices-1``; ``names`` holds external names.  A loop
    label is a tuple of handles whose product is the diagonal matrix sitting at
    that vertex (several handles appear after vertices are merged).  Numeric
    matrices for the handles live in ``payloads``.
    """

    __test__ = False  # not a pytest class despite the name

    def __init__(
        self,
        n_vertices: int,
        edges: Iterable[Edge | tuple],
        loop_labels: Mapping[int, Any] | None = None,
        names: Sequence[str] | None = None,
        payloads: Mapping[Hashable, Any] | None = None,
    ) -> None:
        es = []
        for k, e in enumerate(edges):
            if not isinstance(e, Edge):
                src, dst, colour, label = e[:4]
                eid = e[4] if len(e) > 4 else f"e{k}"
                e = Edge(int(src), int(dst), str(colour), label, str(eid))
            if not (0 <= e.src < n_vertices and 0 <= e.dst < n_vertices):
                raise ValueError(f"edge {e.id} has an endpoint outside 0..{n_vertices - 1}")
            es.append(e)
        ids = [e.id for e in es]
        if len(set(ids)) != len(ids):
            raise ValueError("edge ids must be unique")
        loops: dict[int, tuple] = {}
        for v, lab in (loop_labels or {}).items():
            if not 0 <= v < n_vertices:
                raise ValueError(f"loop label on unknown vertex {v}")
            f = _as_factors(lab)
            if f:
                loops[int(v)] = f
        if names is None:
            names = [str(v) for v in range(n_vertices)]
        if len(names) != n_vertices:
            raise ValueError("one name per vertex required")
        self.n_vertices = n_vertices
        self.edges: tuple[Edge, ...] = tuple(es)
        self.loop_labels: dict[int, tuple] = loops
        self.names: tuple[str, ...] = tuple(names)
        self.payloads: dict[Hashable, Any] = dict(payloads or {})

    def __repr__(self) -> str:
        return f"TestDigraph(n_vertices={self.n_vertices}, edges={len(self.edges)}, loops={len(self.loop_labels)})"

    @property
    def colours(self) -> tuple[str, ...]:
        return tuple(sorted({e.colour for e in self.edges}))

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def vertex(self, name: str) -> int:
        return self.names.index(name)

    def with_payloads(self, payloads: Mapping[Hashable, Any]) -> TestDigraph:
        merged = dict(self.payloads)
        merged.update(payloads)
        return TestDigraph(self.n_vertices, self.edges, self.loop_labels, self.names, merged)

    def with_loops(self, loop_labels: Mapping[int, Any]) -> TestDigraph:
        return TestDigraph(self.n_vertices, self.edges, loop_labels, self.names, self.payloads)

    def without_loops(self) -> TestDigraph:
        return TestDigraph(self.n_vertices, self.edges, None, self.names, self.payloads)

    def shape(self) -> tuple[int, int]:
        return self.n_vertices, len(self.edges)

    def edge_counts(self) -> dict[tuple[str, str], int]:
        """Multiplicity of each (source name, target name) pair."""
        out: dict[tuple[str, str], int] = {}
        for e in self.edges:
            key = (self.names[e.src], self.names[e.dst])
            out[key] = out.get(key, 0) + 1
        return out


@dataclass(frozen=True)
class ColourGraph:
    """Simple undirected graph on colours; adjacent colours commute."""

    colours: tuple[str, ...]
    edges: frozenset[frozenset[str]] = frozenset()

    def __post_init__(self) -> None:
        cs = set(self.colours)
        if len(cs) != len(self.colours):
            raise ValueError("duplicate colours")
        for pair in self.edges:
            if len(pair) != 2:
                raise ValueError("colour graph must have no self-loops")
            if not pair <= cs:
                raise ValueError(f"edge {sorted(pair)} uses an unknown colour")

    @classmethod
    def from_pairs(cls, colours: Sequence[str], pairs: Iterable[Sequence[str]]) -> ColourGraph:
        es = set()
        for p in pairs:
            a, b = p
            if a == b:
                raise ValueError(f"self-loop on colour {a}")
            es.add(frozenset((a, b)))
        return cls(tuple(colours), frozenset(es))

    @classmethod
    def complete(cls, colours: Sequence[str]) -> ColourGraph:
        return cls.from_pairs(colours, itertools.combinations(colours, 2))

    @classmethod
    def edgeless(cls, colours: Sequence[str]) -> ColourGraph:
        return cls(tuple(colours))

    def adjacent(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.edges

    def sorted_edges(self) -> list[tuple[str, str]]:
        order = {c: i for i, c in enumerate(self.colours)}
        pairs = [tuple(sorted(p, key=order.__getitem__)) for p in self.edges]
        return sorted(pairs, key=lambda p: (order[p[0]], order[p[1]]))


@dataclass(frozen=True)
class StringAssignment:
    """The relation between strings (tensor legs) and colours."""

    strings: tuple[str, ...]
    colours: tuple[str, ...]
    incidence: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        if len(set(self.strings)) != len(self.strings):
            raise ValueError("duplicate strings")
        if len(set(self.colours)) != len(self.colours):
            raise ValueError("duplicate colours")
        for s, c in self.incidence:
            if s not in self.strings:
                raise ValueError(f"unknown string {s!r}")
            if c not in self.colours:
                raise ValueError(f"unknown colour {c!r}")
        for c in self.colours:
            if not self.strings_of(c):
                raise ValueError(f"colour {c!r} has no strings")

    @classmethod
    def from_strings_of(cls, strings_of: Mapping[str, Iterable[str]], strings: Sequence[str] | None = None) -> StringAssignment:
        """Build from a map colour -> strings (S_c)."""
        inc = {(s, c) for c, ss in strings_of.items() for s in ss}
        if strings is None:
            seen: list[str] = []
            for ss in strings_of.values():
                for s in ss:
                    if s not in seen:
                        seen.append(s)
            strings = sorted(seen)
        return cls(tuple(strings), tuple(strings_of), frozenset(inc))

    @classmethod
    def from_colours_of(cls, colours_of: Mapping[str, Iterable[str]], colours: Sequence[str] | None = None) -> StringAssignment:
        """Build from a map string -> colours (C_s)."""
        inc = {(s, c) for s, cs in colours_of.items() for c in cs}
        if colours is None:
            colours = sorted({c for _, c in inc})
        return cls(tuple(colours_of), tuple(colours), frozenset(inc))

    def strings_of(self, c: str) -> tuple[str, ...]:
        if c not in self.colours:
            raise KeyError(f"unknown colour {c!r}")
        return tuple(s for s in self.strings if (s, c) in self.incidence)

    def colours_of(self, s: str) -> tuple[str, ...]:
        if s not in self.strings:
            raise KeyError(f"unknown string {s!r}")
        return tuple(c for c in self.colours if (s, c) in self.incidence)

    def induced_graph(self) -> ColourGraph:
        """Colour graph in which colours are adjacent iff their strings are disjoint."""
        pairs = [
            (a, b)
            for a, b in itertools.combinations(self.colours, 2)
            if not set(self.strings_of(a)) & set(self.strings_of(b))
        ]
        return ColourGraph.from_pairs(self.colours, pairs)

    def check(self, G: ColourGraph) -> list[str]:
        """Violations of the compatibility with ``G`` (empty list when valid)."""
        problems = []
        if set(G.colours) - set(self.colours):
            problems.append(f"colours without strings: {sorted(set(G.colours) - set(self.colours))}")
            return problems
        for a, b in itertools.combinations(G.colours, 2):
            disjoint = not set(self.strings_of(a)) & set(self.strings_of(b))
            if disjoint != G.adjacent(a, b):
                want = "disjoint" if G.adjacent(a, b) else "overlapping"
                problems.append(f"colours {a},{b} should have {want} strings")
        return problems

    def is_valid_for(self, G: ColourGraph) -> bool:
        return not self.check(G)

    def index_space(self, N: int) -> int:
        return N ** len(self.strings)


def _union_find(n: int, pairs: Iterable[tuple[int, int]]) -> list[int]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return [find(v) for v in range(n)]


def components(T: TestDigraph) -> Partition:
    """Weakly connected components."""
    return Partition.from_labels(_union_find(T.n_vertices, ((e.src, e.dst) for e in T.edges)))


def _block_name(T: TestDigraph, block: Sequence[int]) -> str:
    if len(block) == 1:
        return T.names[block[0]]
    return "{" + ",".join(T.names[v] for v in block) + "}"


def quotient(T: TestDigraph, p: Partition) -> TestDigraph:
    """Identify the vertices in each block of ``p``.

    New vertex ``j`` is the ``j``-th block in canonical order.  Loop labels of
    merged vertices are concatenated in ascending original vertex order.
    """
    if p.ground_size != T.n_vertices:
        raise ValueError("partition does not match vertex count")
    lab = p.labels
    edges = [replace(e, src=lab[e.src], dst=lab[e.dst]) for e in T.edges]
    loops: dict[int, tuple] = {}
    for v in sorted(T.loop_labels):
        loops[lab[v]] = loops.get(lab[v], ()) + T.loop_labels[v]
    names = [_block_name(T, b) for b in p.blocks]
    return TestDigraph(len(p), edges, loops, names, T.payloads)


def restrict_colours(T: TestDigraph, colours: Iterable[str]) -> TestDigraph:
    """Same vertices and loops; only edges whose colour is in ``colours``."""
    keep = set(colours)
    return TestDigraph(T.n_vertices, [e for e in T.edges if e.colour in keep], T.loop_labels, T.names, T.payloads)


def rho(T: TestDigraph, A: StringAssignment, s: str) -> Partition:
    """Components of the edges whose colour does not use string ``s``."""
    if s not in A.strings:
        raise ValueError(f"unknown string {s!r}")
    on_s = set(A.colours_of(s))
    return components(restrict_colours(T, [c for c in A.colours if c not in on_s]))


def rho_tuple(T: TestDigraph, A: StringAssignment) -> PartitionTuple:
    return PartitionTuple(A.strings, tuple(rho(T, A, s) for s in A.strings))


def pi_colour(pi: PartitionTuple, A: StringAssignment, c: str) -> Partition:
    """Meet of the partitions of the strings used by colour ``c``."""
    if c not in A.colours:
        raise ValueError(f"unknown colour {c!r}")
    ss = A.strings_of(c)
    out = pi[ss[0]]
    for s in ss[1:]:
        out = meet(out, pi[s])
    return out


def colour_quotient(T: TestDigraph, A: StringAssignment, pi: PartitionTuple, c: str) -> TestDigraph:
    """Edges of colour ``c`` with vertices identified by the colour partition of ``pi``."""
    return quotient(restrict_colours(T, [c]), pi_colour(pi, A, c))


def string_quotient(T: TestDigraph, A: StringAssignment, pi: PartitionTuple, s: str) -> TestDigraph:
    """Edges whose colour uses string ``s``, vertices identified by ``pi[s]``."""
    return quotient(restrict_colours(T, A.colours_of(s)), pi[s])


@dataclass(frozen=True)
class TwoEdgeConnected:
    components: Partition
    cut_edges: frozenset[str]
    forest_edges: tuple[tuple[int, int, str], ...]
    trees: tuple[tuple[int, ...], ...]
    leaf_count: int


def _cut_edges(T: TestDigraph) -> set[str]:
    # Tarjan low-link on the undirected multigraph; parallel edges are told
    # apart by id so a doubled edge is never a bridge.
    adj: list[list[tuple[int, int]]] = [[] for _ in range(T.n_vertices)]
    for k, e in enumerate(T.edges):
        if e.src == e.dst:
            continue
        adj[e.src].append((e.dst, k))
        adj[e.dst].append((e.src, k))
    order = [-1] * T.n_vertices
    low = [0] * T.n_vertices
    bridges: set[str] = set()
    counter = 0
    for root in range(T.n_vertices):
        if order[root] != -1:
            continue
        order[root] = low[root] = counter
        counter += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for w, k in it:
                if k == via:
                    continue
                if order[w] == -1:
                    order[w] = low[w] = counter
                    counter += 1
                    stack.append((w, k, iter(adj[w])))
                    advanced = True
                    break
                low[v] = min(low[v], order[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                u = stack[-1][0]
                low[u] = min(low[u], low[v])
                if low[v] > order[u]:
                    bridges.add(T.edges[via].id)
    return bridges


def two_edge_connected(T: TestDigraph) -> TwoEdgeConnected:
    """Two-edge-connected components, cut edges, the bridge forest and its leaf count.

    Each tree of the forest with a single vertex contributes two leaves.
    """
    cuts = _cut_edges(T)
    kept = [(e.src, e.dst) for e in T.edges if e.id not in cuts]
    comps = Partition.from_labels(_union_find(T.n_vertices, kept))
    lab = comps.labels
    fedges = tuple(sorted((lab[e.src], lab[e.dst], e.id) for e in T.edges if e.id in cuts))
    forest_parts = Partition.from_labels(_union_find(len(comps), ((a, b) for a, b, _ in fedges)))
    degree = [0] * len(comps)
    for a, b, _ in fedges:
        degree[a] += 1
        degree[b] += 1
    leaves = 0
    for tree in forest_parts.blocks:
        if len(tree) == 1:
            leaves += 2
        else:
            leaves += sum(1 for x in tree if degree[x] == 1)
    return TwoEdgeConnected(comps, frozenset(cuts), fedges, forest_parts.blocks, leaves)


def leaf_count(T: TestDigraph) -> int:
    return two_edge_connected(T).leaf_count


@dataclass(frozen=True)
class BipartiteMultigraph:
    """Left nodes, right nodes and tagged edges ``(left index, right index, tag)``."""

    left: tuple[str, ...]
    right: tuple[tuple[str, int], ...]
    edges: tuple[tuple[int, int, tuple[str, int]], ...]
    right_names: tuple[str, ...] = field(default=())

    @property
    def n_nodes(self) -> int:
        return len(self.left) + len(self.right)

    def multiplicity(self, left: int, right: tuple[str, int]) -> int:
        j = self.right.index(right)
        return sum(1 for a, b, _ in self.edges if a == left and b == j)


def _pi_above_rho(T: TestDigraph, A: StringAssignment, pi: PartitionTuple) -> bool:
    return all(leq(rho(T, A, s), pi[s]) for s in A.strings)


def gcc(T: TestDigraph, A: StringAssignment, pi: PartitionTuple, s: str, check: bool = True) -> BipartiteMultigraph:
    """Graph of coloured components for string ``s``.

    Left nodes are the blocks of ``pi[s]``.  Right nodes are the components of
    the colour quotients for the colours on ``s``.  Every vertex of such a
    colour quotient is an edge, from its component to the block of ``pi[s]``
    containing it.
    """
    if tuple(pi.strings) != tuple(A.strings):
        raise ValueError("partition tuple must be indexed by the assignment strings")
    if check and not _pi_above_rho(T, A, pi):
        raise ValueError("gcc needs pi[s] >= rho(T, A, s) for every string")
    ps = pi[s]
    left = tuple(_block_name(T, b) for b in ps.blocks)
    right: list[tuple[str, int]] = []
    right_names: list[str] = []
    edges: list[tuple[int, int, tuple[str, int]]] = []
    for c in A.colours_of(s):
        pc = pi_colour(pi, A, c)
        Tc = quotient(restrict_colours(T, [c]), pc)
        comp = components(Tc)
        offset = len(right)
        for j, cb in enumerate(comp.blocks):
            right.append((c, j))
            members = sorted(v for w in cb for v in pc.blocks[w])
            right_names.append(c + ":{" + ",".join(T.names[v] for v in members) + "}")
        for w, block in enumerate(pc.blocks):
            edges.append((ps.labels[block[0]], offset + comp.labels[w], (c, w)))
    return BipartiteMultigraph(left, tuple(right), tuple(edges), tuple(right_names))


def is_tree(g: BipartiteMultigraph) -> bool:
    """Connected with exactly one fewer edge than nodes; parallel edges are cycles."""
    n = g.n_nodes
    if n == 0:
        return False
    if len(g.edges) != n - 1:
        return False
    L = len(g.left)
    roots = _union_find(n, ((a, L + b) for a, b, _ in g.edges))
    return len(set(roots)) == 1


def induced_gcc_walk(
    T: TestDigraph, A: StringAssignment, pi: PartitionTuple, s: str, walk: Sequence[str]
) -> tuple[list[tuple[str, Any]], list[tuple[str, int]]]:
    """Walk in ``gcc(T, A, pi, s)`` induced by a walk of edge ids in ``T``.

    Returns the visited nodes, as ``("L", block index)`` or ``("R", (colour,
    component))``, and the traversed gcc edges as ``(colour, vertex of the
    colour quotient)``.  Edges whose colour avoids ``s`` are skipped; the block
    of ``pi[s]`` is unchanged across them.
    """
    es = [T.edge(eid) for eid in walk]
    if not es:
        return [], []
    # orient each step of the undirected walk
    steps: list[tuple[Edge, int, int]] = []
    if len(es) == 1:
        start = es[0].src
    else:
        first, second = es[0], es[1]
        start = first.src if first.dst in (second.src, second.dst) else first.dst
    cur = start
    for e in es:
        if cur == e.src:
            steps.append((e, e.src, e.dst))
            cur = e.dst
        elif cur == e.dst:
            steps.append((e, e.dst, e.src))
            cur = e.src
        else:
            raise ValueError(f"edge {e.id} does not continue the walk")
    on_s = set(A.colours_of(s))
    ps = pi[s]
    nodes: list[tuple[str, Any]] = []
    gedges: list[tuple[str, int]] = []
    comp_cache: dict[str, tuple[Partition, Partition]] = {}
    for e, x, y in steps:
        if e.colour not in on_s:
            if ps.labels[x] != ps.labels[y]:
                raise ValueError("walk leaves a block of pi[s] through an edge avoiding s")
            continue
        c = e.colour
        if c not in comp_cache:
            pc = pi_colour(pi, A, c)
            comp_cache[c] = (pc, components(quotient(restrict_colours(T, [c]), pc)))
        pc, comp = comp_cache[c]
        here = ("L", ps.labels[x])
        if not nodes:
            nodes.append(here)
        elif nodes[-1] != here:
            raise ValueError("consecutive gcc steps do not meet")
        nodes.append(("R", (c, comp.labels[pc.labels[x]])))
        nodes.append(("L", ps.labels[y]))
        gedges.append((c, pc.labels[x]))
        gedges.append((c, pc.labels[y]))
    return nodes, gedges


def is_g_reduced(word: Sequence[str], G: ColourGraph) -> bool:
    """Every repeated colour is separated by some colour not adjacent to it."""
    for c in word:
        if c not in G.colours:
            raise ValueError(f"unknown colour {c!r}")
    for i, k in itertools.combinations(range(len(word)), 2):
        if word[i] != word[k]:
            continue
        if not any(not G.adjacent(word[i], word[j]) for j in range(i + 1, k)):
            return False
    return True


def build_string_assignment(G: ColourGraph) -> StringAssignment:
    """One private string per colour plus one shared string per non-adjacent pair."""
    strings_of: dict[str, list[str]] = {c: [f"s[{c}]"] for c in G.colours}
    strings = [f"s[{c}]" for c in G.colours]
    for a, b in itertools.combinations(G.colours, 2):
        if not G.adjacent(a, b):
            name = f"s[{a},{b}]"
            strings.append(name)
            strings_of[a].append(name)
            strings_of[b].append(name)
    return StringAssignment.from_strings_of(strings_of, strings)


def minimize_strings(G: ColourGraph) -> StringAssignment:
    """Assignment with few strings from a greedy clique cover of the complement graph.

    Each string is a set of pairwise non-adjacent colours; every non-adjacent
    pair shares at least one string and colours adjacent to everything get a
    private string.
    """
    cs = list(G.colours)
    uncovered = {frozenset(p) for p in itertools.combinations(cs, 2) if not G.adjacent(*p)}
    cliques: list[list[str]] = []
    while uncovered:
        a, b = sorted(min(uncovered, key=lambda p: sorted(cs.index(x) for x in p)), key=cs.index)
        clique = [a, b]
        while True:
            cands = [
                c for c in cs
                if c not in clique and all(not G.adjacent(c, d) for d in clique)
            ]
            if not cands:
                break
            best = max(cands, key=lambda c: (sum(frozenset((c, d)) in uncovered for d in clique), -cs.index(c)))
            clique.append(best)
        for p in itertools.combinations(clique, 2):
            uncovered.discard(frozenset(p))
        cliques.append(sorted(clique, key=cs.index))
    covered = {c for q in cliques for c in q}
    for c in cs:
        if c not in covered:
            cliques.append([c])
    colours_of = {f"t{j}": q for j, q in enumerate(cliques)}
    return StringAssignment.from_colours_of(colours_of, cs)
