"""Traffic moments of coloured test digraphs.

An edge ``u -> v`` labelled ``X`` contributes the entry ``X[i(v), i(u)]``; a
loop label contributes the diagonal entry at ``i(v)``.  With a
:class:`StringAssignment` every vertex is indexed by ``[N]^S``: an edge of
colour ``c`` carries a matrix on the legs ``S_c`` which is lifted by identities
to the ambient space of dimension ``N**len(S)``.  Without an assignment the
labels are plain ``N x N`` matrices.

Sums are normalised by ``M**#components`` where ``M`` is the size of the index
space, so for a connected digraph the normaliser is ``1/M``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterator, Mapping, Sequence

import numpy as np

from ._tensor import conjugate_by, flat_index, lift_diagonal, lift_matrix
from .combinat import (
    Partition,
    PartitionTuple,
    enumerate_above,
    enumerate_partitions,
    leq,
    meet,
    moebius_coefficient,
)
from .digraphs import (
    Edge,
    StringAssignment,
    TestDigraph,
    colour_quotient,
    components,
    gcc,
    is_tree,
    quotient,
    rho,
    rho_tuple,
    two_edge_connected,
)

__all__ = [
    "MomentReport",
    "CenteredProductGraph",
    "trace_tau",
    "trace_tau_injective",
    "raw_trace",
    "raw_injective_trace",
    "gamma",
    "kernel_map_count",
    "lambda_weight",
    "expected_gamma",
    "expected_trace",
    "permutation_average",
    "sampled_trace",
    "leafcount_exponent",
    "mingo_speicher_bound",
    "build_centered_product_graph",
    "attach_word_payloads",
    "centered_norm_expansion",
    "centered_norm_direct",
    "j_set",
    "check_inconsistency",
    "inconsistency_search",
    "enumerate_partition_tuples",
]

Perms = Mapping[str, np.ndarray]


# ---------------------------------------------------------------------------
# label resolution


def _payload(T: TestDigraph, handle: Hashable) -> np.ndarray:
    try:
        return np.asarray(T.payloads[handle])
    except KeyError:
        raise ValueError(f"no numeric payload for label {handle!r}") from None


def _ambient(T: TestDigraph, N: int, A: StringAssignment | None, perms: Perms | None) -> tuple[int, Callable[[Edge], np.ndarray], Callable[[tuple], np.ndarray]]:
    """Index-space size and resolvers for edge matrices and loop diagonals."""
    if A is None:
        M = N
    else:
        M = N ** len(A.strings)
    cache: dict[str, np.ndarray] = {}

    def edge_matrix(e: Edge) -> np.ndarray:
        if e.id in cache:
            return cache[e.id]
        X = _payload(T, e.label)
        if A is None:
            if X.shape != (N, N):
                raise ValueError(f"label of edge {e.id} has shape {X.shape}, expected {(N, N)}")
            if perms is not None and e.colour in perms:
                X = conjugate_by(X, np.asarray(perms[e.colour]))
        else:
            ss = A.strings_of(e.colour)
            d = N ** len(ss)
            if X.shape != (d, d):
                raise ValueError(f"label of edge {e.id} has shape {X.shape}, expected {(d, d)}")
            if perms is not None:
                sigma = np.asarray(perms[e.colour])
                if sigma.shape != (d,):
                    raise ValueError(f"permutation for colour {e.colour} has length {sigma.shape[0]}, expected {d}")
                X = conjugate_by(X, sigma)
            X = lift_matrix(X, [A.strings.index(s) for s in ss], len(A.strings), N)
        cache[e.id] = X
        return X

    def loop_vector(factors: tuple) -> np.ndarray:
        out = np.ones(M, dtype=complex)
        for h in factors:
            d = _payload(T, h)
            if d.ndim == 2:
                d = np.diagonal(d)
            if d.shape != (M,):
                raise ValueError(f"loop label {h!r} has length {d.shape}, expected {M}")
            out = out * d
        return out

    return M, edge_matrix, loop_vector


# ---------------------------------------------------------------------------
# full and injective sums


def _raw_sum(T: TestDigraph, M: int, edge_matrix: Callable[[Edge], np.ndarray], loop_vector: Callable[[tuple], np.ndarray]) -> complex:
    """Unnormalised sum over all index maps, by tensor contraction."""
    operands: list[Any] = []
    used = set()
    for e in T.edges:
        operands.append(edge_matrix(e))
        operands.append([e.dst, e.src])
        used.update((e.src, e.dst))
    for v, f in sorted(T.loop_labels.items()):
        operands.append(loop_vector(f))
        operands.append([v])
        used.add(v)
    free = T.n_vertices - len(used)
    scale = float(M) ** free
    if not operands:
        return complex(scale)
    val = np.einsum(*operands, [], optimize="greedy")
    return complex(val) * scale


def _raw_injective_enumerate(T: TestDigraph, M: int, edge_matrix, loop_vector) -> complex:
    n = T.n_vertices
    if n > M:
        return 0j
    if n == 0:
        return 1 + 0j
    maps = np.array(list(itertools.permutations(range(M), n)), dtype=np.int64)
    return _sum_over_maps(T, maps, edge_matrix, loop_vector)


def _sum_over_maps(T: TestDigraph, maps: np.ndarray, edge_matrix, loop_vector) -> complex:
    if maps.shape[0] == 0:
        return 0j
    vals = np.ones(maps.shape[0], dtype=complex)
    for e in T.edges:
        vals *= edge_matrix(e)[maps[:, e.dst], maps[:, e.src]]
    for v, f in T.loop_labels.items():
        vals *= loop_vector(f)[maps[:, v]]
    return complex(vals.sum())


def _raw_injective_moebius(T: TestDigraph, M: int, edge_matrix, loop_vector) -> complex:
    # injective sum = sum over p of mu(0, p) * full sum on T/p
    bottom = Partition.bottom(T.n_vertices)
    total = 0j
    for p in enumerate_partitions(T.n_vertices):
        total += moebius_coefficient(bottom, p) * _raw_sum(quotient(T, p), M, edge_matrix, loop_vector)
    return total


def raw_trace(T: TestDigraph, N: int, A: StringAssignment | None = None, perms: Perms | None = None) -> complex:
    """Unnormalised sum over all index maps."""
    M, em, lv = _ambient(T, N, A, perms)
    return _raw_sum(T, M, em, lv)


def raw_injective_trace(T: TestDigraph, N: int, A: StringAssignment | None = None, perms: Perms | None = None, method: str = "auto") -> complex:
    """Unnormalised sum over injective index maps.

    ``method`` is ``"enumerate"`` (direct), ``"moebius"`` (inversion over vertex
    partitions) or ``"auto"``.
    """
    M, em, lv = _ambient(T, N, A, perms)
    return _raw_injective(T, M, em, lv, method)


def _raw_injective(T: TestDigraph, M: int, em, lv, method: str = "auto") -> complex:
    if method == "auto":
        n = T.n_vertices
        method = "enumerate" if n > M or math.perm(M, n) <= 20000 else "moebius"
    if method == "enumerate":
        return _raw_injective_enumerate(T, M, em, lv)
    if method == "moebius":
        return _raw_injective_moebius(T, M, em, lv)
    raise ValueError(f"unknown method {method!r}")


def trace_tau(T: TestDigraph, N: int, A: StringAssignment | None = None, perms: Perms | None = None) -> complex:
    """Normalised trace of a test digraph (loop labels included when present).

    ``perms`` maps colours to index permutations; when given, each label ``X`` of
    colour ``c`` is replaced by its conjugate ``S_c^T X S_c`` before lifting.
    """
    M, em, lv = _ambient(T, N, A, perms)
    return _raw_sum(T, M, em, lv) / float(M) ** len(components(T))


def trace_tau_injective(T: TestDigraph, N: int, A: StringAssignment | None = None, perms: Perms | None = None, method: str = "auto") -> complex:
    """Normalised trace restricted to injective index maps."""
    M, em, lv = _ambient(T, N, A, perms)
    return _raw_injective(T, M, em, lv, method) / float(M) ** len(components(T))


# ---------------------------------------------------------------------------
# kernel expansion


def enumerate_partition_tuples(strings: Sequence[str], floors: Sequence[Partition]) -> Iterator[PartitionTuple]:
    """Lexicographic product of the streams ``enumerate_above(floor)``."""
    pools = [list(enumerate_above(f)) for f in floors]
    for combo in itertools.product(*pools):
        yield PartitionTuple(tuple(strings), tuple(combo))


def _kernel_maps(pi: PartitionTuple, A: StringAssignment, N: int) -> np.ndarray:
    """All ``i: V -> [N]^S`` with ``ker(i_s) = pi[s]``, as flat ambient indices."""
    n = pi.ground_size
    per_string = []
    for s in A.strings:
        p = pi[s]
        inj = np.array(list(itertools.permutations(range(N), len(p))), dtype=np.int64).reshape(-1, len(p))
        labels = np.array(p.labels, dtype=np.int64)
        per_string.append(inj[:, labels] if n else inj[:, :0])
    m = len(A.strings)
    counts = [a.shape[0] for a in per_string]
    total = math.prod(counts)
    digits = np.empty((total, n, m), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")
    for pos, (arr, g) in enumerate(zip(per_string, grids)):
        digits[:, :, pos] = arr[g.reshape(-1)]
    return flat_index(digits, N)


def kernel_map_count(pi: PartitionTuple, N: int) -> int:
    """Number of index maps whose kernels are prescribed by ``pi``."""
    return math.prod(math.perm(N, len(p)) for p in pi.parts)


def _check_pi(T: TestDigraph, A: StringAssignment, pi: PartitionTuple) -> None:
    if tuple(pi.strings) != tuple(A.strings):
        raise ValueError("partition tuple must be indexed by the assignment strings in order")
    if pi.ground_size != T.n_vertices:
        raise ValueError("partition tuple does not match the vertex count")


def gamma(T: TestDigraph, A: StringAssignment, pi: PartitionTuple, N: int, perms: Perms | None = None) -> complex:
    """Part of the loop-graph trace coming from index maps with kernels ``pi``.

    Summing over every partition tuple recovers ``trace_tau(T, N, A, perms)``.
    """
    _check_pi(T, A, pi)
    M, em, lv = _ambient(T, N, A, perms)
    maps = _kernel_maps(pi, A, N)
    return _sum_over_maps(T, maps, em, lv) / float(M) ** len(components(T))


def lambda_weight(T: TestDigraph, A: StringAssignment, pi: PartitionTuple, N: int) -> complex:
    """Average of the loop-label product over the kernel-constrained index maps.

    Missing loop labels count as identities.
    """
    _check_pi(T, A, pi)
    M, _, lv = _ambient(T, N, A, None)
    loops_only = TestDigraph(T.n_vertices, [], T.loop_labels, T.names, T.payloads)
    maps = _kernel_maps(pi, A, N)
    total = _sum_over_maps(loops_only, maps, None, lv)
    return total / float(N) ** sum(len(p) for p in pi.parts)


def _injective_cached(Tc: TestDigraph, Mc: int, em, cache: dict | None) -> complex:
    key = None
    if cache is not None:
        key = (Tc.n_vertices, Mc, tuple((e.src, e.dst, e.label) for e in Tc.edges))
        if key in cache:
            return cache[key]
    val = _raw_injective(Tc, Mc, em, lambda f: None)
    if cache is not None:
        cache[key] = val
    return val


def expected_gamma(T: TestDigraph, A: StringAssignment, pi: PartitionTuple, N: int, _cache: dict | None = None) -> complex:
    """Exact average of :func:`gamma` over independent uniform permutations, one per colour.

    Requires ``T`` connected and ``pi[s] >= rho(T, A, s)`` for every string.
    """
    _check_pi(T, A, pi)
    if len(components(T)) != 1:
        raise ValueError("expected_gamma needs a connected digraph")
    if not all(leq(rho(T, A, s), pi[s]) for s in A.strings):
        raise ValueError("expected_gamma needs pi[s] >= rho(T, A, s) for every string")
    value = complex(float(N) ** sum(len(p) - 1 for p in pi.parts)) * lambda_weight(T, A, pi, N)
    for c in A.colours:
        Tc = colour_quotient(T, A, pi, c).without_loops()
        Mc = N ** len(A.strings_of(c))
        nv = Tc.n_vertices
        if nv > Mc:
            return 0j
        _, em, _ = _ambient(Tc, Mc, None, None)
        value *= _injective_cached(Tc, Mc, em, _cache) / math.perm(Mc, nv)
    return value


def leafcount_exponent(T: TestDigraph, A: StringAssignment, pi: PartitionTuple) -> Fraction:
    """Power of ``N`` bounding the expected term for ``pi`` (never positive when ``T`` is two-edge connected)."""
    total = Fraction(sum(len(p) - 1 for p in pi.parts))
    for c in A.colours:
        Tc = colour_quotient(T, A, pi, c)
        total += len(A.strings_of(c)) * (Fraction(two_edge_connected(Tc).leaf_count, 2) - Tc.n_vertices)
    return total


@dataclass
class MomentReport:
    value: complex
    term_breakdown: dict[PartitionTuple, complex] = field(default_factory=dict)
    dropped_terms: dict[str, int] = field(default_factory=dict)
    mode: str = "exact"
    error_order: str | None = None


def expected_trace(T: TestDigraph, A: StringAssignment, N: int, mode: str = "exact") -> MomentReport:
    """Expected loop-graph trace under the permutation model.

    ``mode="exact"`` sums :func:`expected_gamma` over every ``pi`` above ``rho``.
    ``mode="leading"`` needs ``T`` two-edge connected; it keeps the ``pi`` whose
    component graphs are all trees and reports the leading term, which differs
    from the exact value by ``O(1/N)``.
    """
    if len(components(T)) != 1:
        raise ValueError("expected_trace needs a connected digraph")
    if mode not in ("exact", "leading"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "leading":
        tec = two_edge_connected(T)
        if tec.cut_edges:
            raise ValueError("leading mode needs a two-edge-connected digraph")
    floors = rho_tuple(T, A)
    cache: dict = {}
    report = MomentReport(0j, mode=mode, error_order="O(1/N)" if mode == "leading" else None)
    for pi in enumerate_partition_tuples(A.strings, floors.parts):
        if mode == "exact":
            term = expected_gamma(T, A, pi, N, cache)
        else:
            if not all(is_tree(gcc(T, A, pi, s, check=False)) for s in A.strings):
                report.dropped_terms["gcc-not-tree"] = report.dropped_terms.get("gcc-not-tree", 0) + 1
                continue
            term = lambda_weight(T, A, pi, N)
            for c in A.colours:
                Tc = colour_quotient(T, A, pi, c).without_loops()
                Mc = N ** len(A.strings_of(c))
                _, em, _ = _ambient(Tc, Mc, None, None)
                term *= _injective_cached(Tc, Mc, em, cache) / float(Mc) ** len(components(Tc))
        report.term_breakdown[pi] = term
        report.value += term
    return report


def _colour_perm_pools(A: StringAssignment, N: int, colours: Sequence[str]) -> list[list[np.ndarray]]:
    return [[np.array(p) for p in itertools.permutations(range(N ** len(A.strings_of(c))))] for c in colours]


def permutation_average(T: TestDigraph, A: StringAssignment, N: int, limit: int = 2_000_000) -> complex:
    """Exact average of ``trace_tau`` over every tuple of colour permutations."""
    colours = sorted({e.colour for e in T.edges})
    sizes = [math.factorial(N ** len(A.strings_of(c))) for c in colours]
    if math.prod(sizes) > limit:
        raise ValueError("too many permutation tuples for exhaustive averaging")
    pools = _colour_perm_pools(A, N, colours)
    total = 0j
    count = 0
    for combo in itertools.product(*pools):
        total += trace_tau(T, N, A, dict(zip(colours, combo)))
        count += 1
    return total / count


def sampled_trace(T: TestDigraph, A: StringAssignment, N: int, rng: np.random.Generator) -> complex:
    """``trace_tau`` at one draw of independent uniform colour permutations."""
    perms = {c: rng.permutation(N ** len(A.strings_of(c))) for c in A.colours}
    return trace_tau(T, N, A, perms)


def mingo_speicher_bound(T: TestDigraph, N: int, edge_norms: Mapping[str, float]) -> float:
    """``N**(f/2 - #components)`` times the product of edge norms (edges keyed by id).

    ``f`` is the leaf count of the bridge forest.  The unspecified constant in
    front is taken to be one; callers compare against the observed ratio.
    """
    if any(x < 0 for x in edge_norms.values()):
        raise ValueError("norms must be nonnegative")
    f = two_edge_connected(T).leaf_count
    prod = math.prod(float(edge_norms[e.id]) for e in T.edges)
    return float(N) ** (f / 2 - len(components(T))) * prod


# ---------------------------------------------------------------------------
# two cycles glued at one vertex


@dataclass(frozen=True)
class CenteredProductGraph:
    """Digraph whose loop-graph trace is the squared 2-norm of the diagonal of ``Y_1...Y_k``.

    The first cycle runs through ``anchors[i]`` (row vertex of ``Y_{i+1}``),
    the mirrored cycle through ``mirror_anchors[i]``; both share vertex 0.
    """

    digraph: TestDigraph
    word: tuple[tuple[str, int], ...]
    anchors: tuple[int, ...]
    mirror_anchors: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.word)

    def centering_partition(self, I: Sequence[int]) -> Partition:
        """Identify the endpoints of block ``i`` (``-i`` for mirrored blocks) for ``i`` in ``I``."""
        pairs = []
        for i in I:
            j = abs(i) - 1
            if not 0 <= j < self.k or i == 0:
                raise ValueError(f"block index {i} out of range")
            ring = self.anchors if i > 0 else self.mirror_anchors
            pairs.append((ring[j], ring[(j + 1) % self.k]))
        n = self.digraph.n_vertices
        labels = list(range(n))
        for a, b in pairs:
            la, lb = labels[a], labels[b]
            labels = [la if x == lb else x for x in labels]
        return Partition.from_labels(labels)


def build_centered_product_graph(
    word: Sequence[tuple[str, int]],
    labels: Mapping[tuple[int, int], Hashable] | None = None,
    loop_labels: Mapping[tuple[int, int], Hashable] | None = None,
) -> CenteredProductGraph:
    """Two cycles glued at one vertex encoding ``||Delta[Y_1 ... Y_k]||_2^2``.

    Block ``i`` (1-based) is a path of ``l(i)`` edges of colour ``word[i-1][0]``
    whose labels ``X_{i,j}`` multiply to ``Y_i``; the mirrored cycle carries the
    adjoints.  Default handles are ``"X{i}.{j}"`` and ``"X{i}.{j}*"``; loop
    handles ``"L{i}.{j}"`` and ``"L{i}.{j}*"`` are used only when ``loop_labels``
    is given (or passed as ``{}`` to request the defaults).
    """
    if not word:
        raise ValueError("empty word")
    for c, l in word:
        if l < 1:
            raise ValueError("every block needs at least one edge")
    k = len(word)
    # u[(i, j)] for j = 1..l(i); u[(i, l(i)+1)] is u[(i+1, 1)]
    u: dict[tuple[int, int], int] = {}
    names: list[str] = []
    for i in range(1, k + 1):
        for j in range(1, word[i - 1][1] + 1):
            u[(i, j)] = len(names)
            names.append(f"u{i},{j}")
    w: dict[tuple[int, int], int] = {(1, 1): 0}
    for i in range(1, k + 1):
        for j in range(1, word[i - 1][1] + 1):
            if (i, j) != (1, 1):
                w[(i, j)] = len(names)
                names.append(f"u'{i},{j}")

    def nxt(table, i, j):
        if j < word[i - 1][1]:
            return table[(i, j + 1)]
        return table[(i % k + 1, 1)]

    edges = []
    loops: dict[int, tuple] = {}
    for i in range(1, k + 1):
        c = word[i - 1][0]
        for j in range(1, word[i - 1][1] + 1):
            h = labels[(i, j)] if labels and (i, j) in labels else f"X{i}.{j}"
            hs = f"{h}*"
            edges.append(Edge(nxt(u, i, j), u[(i, j)], c, h, f"X{i}.{j}"))
            edges.append(Edge(w[(i, j)], nxt(w, i, j), c, hs, f"X{i}.{j}'"))
            if loop_labels is not None:
                lh = loop_labels.get((i, j), f"L{i}.{j}")
                for vert, handle in ((u[(i, j)], lh), (w[(i, j)], f"{lh}*")):
                    loops[vert] = loops.get(vert, ()) + (handle,)
    T = TestDigraph(len(names), edges, loops, names)
    anchors = tuple(u[(i, 1)] for i in range(1, k + 1))
    mirror = tuple(w[(i, 1)] for i in range(1, k + 1))
    return CenteredProductGraph(T, tuple((c, int(l)) for c, l in word), anchors, mirror)


def attach_word_payloads(
    cpg: CenteredProductGraph,
    X: Mapping[tuple[int, int], np.ndarray],
    loops: Mapping[tuple[int, int], np.ndarray] | None = None,
) -> CenteredProductGraph:
    """Attach matrices ``X[(i, j)]`` and diagonals ``loops[(i, j)]`` plus their adjoints."""
    pay: dict[Hashable, Any] = {}
    for e in cpg.digraph.edges:
        i, j = (int(x) for x in e.id.rstrip("'")[1:].split("."))
        mat = np.asarray(X[(i, j)])
        pay[e.label] = mat.conj().T if e.id.endswith("'") else mat
    for f in cpg.digraph.loop_labels.values():
        for h in f:
            base = h[:-1] if h.endswith("*") else h
            i, j = (int(x) for x in base[1:].split("."))
            d = np.asarray(loops[(i, j)]) if loops is not None else None
            if d is None:
                raise ValueError(f"no diagonal for loop {h}")
            d = np.diagonal(d) if d.ndim == 2 else d
            pay[h] = d.conj() if h.endswith("*") else d
    return CenteredProductGraph(cpg.digraph.with_payloads(pay), cpg.word, cpg.anchors, cpg.mirror_anchors)


def centered_norm_expansion(cpg: CenteredProductGraph, N: int, A: StringAssignment | None = None, perms: Perms | None = None) -> complex:
    """Inclusion-exclusion over centring quotients of the glued cycles."""
    k = cpg.k
    idx = list(range(1, k + 1)) + [-i for i in range(1, k + 1)]
    total = 0j
    for r in range(len(idx) + 1):
        for I in itertools.combinations(idx, r):
            TI = quotient(cpg.digraph, cpg.centering_partition(I))
            total += (-1) ** r * trace_tau(TI, N, A, perms)
    return total


def centered_norm_direct(cpg: CenteredProductGraph, N: int, A: StringAssignment | None = None, perms: Perms | None = None) -> float:
    """``||Delta[(Y_1 - Delta Y_1) ... (Y_k - Delta Y_k)]||_2^2`` by matrix arithmetic."""
    T = cpg.digraph
    M, em, lv = _ambient(T, N, A, perms)
    by_id = {e.id: e for e in T.edges}
    W = np.eye(M, dtype=complex)
    for i in range(1, cpg.k + 1):
        Y = np.eye(M, dtype=complex)
        for j in range(1, cpg.word[i - 1][1] + 1):
            e = by_id[f"X{i}.{j}"]
            f = T.loop_labels.get(e.dst)
            if f:
                own = tuple(h for h in f if not str(h).endswith("*"))
                Y = Y * lv(own)[None, :] if own else Y
            Y = Y @ em(e)
        Y = Y - np.diag(np.diag(Y))
        W = W @ Y
    d = np.diag(W)
    return float(np.mean(np.abs(d) ** 2))


def j_set(cpg: CenteredProductGraph, pi: PartitionTuple) -> frozenset[int]:
    """Blocks whose endpoints are identified by the meet of all string partitions."""
    m = pi.parts[0]
    for p in pi.parts[1:]:
        m = meet(m, p)
    k = cpg.k
    out = set()
    for i in range(k):
        if m.same_block(cpg.anchors[i], cpg.anchors[(i + 1) % k]):
            out.add(i + 1)
        if m.same_block(cpg.mirror_anchors[i], cpg.mirror_anchors[(i + 1) % k]):
            out.add(-(i + 1))
    return frozenset(out)


def check_inconsistency(cpg: CenteredProductGraph, A: StringAssignment, pi: PartitionTuple) -> bool:
    """True iff ``pi`` is above ``rho``, every component graph is a tree and no block closes up.

    For a reduced colour word this never happens.
    """
    T = cpg.digraph
    if not all(leq(rho(T, A, s), pi[s]) for s in A.strings):
        return False
    if j_set(cpg, pi):
        return False
    return all(is_tree(gcc(T, A, pi, s, check=False)) for s in A.strings)


def inconsistency_search(cpg: CenteredProductGraph, A: StringAssignment) -> tuple[int, list[PartitionTuple]]:
    """Exhaustively test every ``pi`` above ``rho``; returns (count examined, counterexamples)."""
    T = cpg.digraph
    floors = rho_tuple(T, A)
    bad = []
    n = 0
    for pi in enumerate_partition_tuples(A.strings, floors.parts):
        n += 1
        if j_set(cpg, pi):
            continue
        if all(is_tree(gcc(T, A, pi, s, check=False)) for s in A.strings):
            bad.append(pi)
    return n, bad
