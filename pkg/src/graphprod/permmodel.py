r"""Random permutation model for graph products.

Each colour ``c`` acts on the tensor legs ``S_c`` of ``(C^N)^{\otimes S}`` and
is conjugated by its own uniformly random permutation of ``[N]^{S_c}``.  Colours
sharing a leg become asymptotically free over the diagonal; colours on
disjoint legs commute.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from ._tensor import conjugate_by, lift_diagonal, lift_matrix
from .errors import ResourceCapError
from .digraphs import ColourGraph, StringAssignment, build_string_assignment, is_g_reduced, minimize_strings

__all__ = [
    "TensorOperand",
    "ColourPermutations",
    "ResourceCapError",
    "draw_permutations",
    "lift",
    "conjugate",
    "delta",
    "centered_word_norm",
    "concentration_tail",
    "trials_for_median",
    "graph_product_microstates",
    "pad_to",
    "independence_experiment",
    "ExperimentRow",
]

DEFAULT_CAP = 4096


@dataclass(frozen=True)
class TensorOperand:
    """Operator ``payload`` on the legs ``support``, identity on the other strings."""

    assignment: StringAssignment
    support: tuple[str, ...]
    payload: np.ndarray
    N: int

    def __post_init__(self) -> None:
        if any(s not in self.assignment.strings for s in self.support):
            raise ValueError("support must be a subset of the assignment strings")
        order = [self.assignment.strings.index(s) for s in self.support]
        if order != sorted(order) or len(set(order)) != len(order):
            raise ValueError("support must follow the assignment string order")
        d = self.N ** len(self.support)
        if self.payload.shape != (d, d):
            raise ValueError(f"payload shape {self.payload.shape} does not match {len(self.support)} legs of size {self.N}")

    @classmethod
    def on_colour(cls, A: StringAssignment, c: str, X: np.ndarray, N: int) -> TensorOperand:
        return cls(A, A.strings_of(c), np.asarray(X), N)

    @property
    def ambient_dim(self) -> int:
        return self.N ** len(self.assignment.strings)

    def positions(self) -> list[int]:
        return [self.assignment.strings.index(s) for s in self.support]

    def trace(self) -> complex:
        """Normalised trace (unchanged by lifting)."""
        return complex(np.trace(self.payload)) / self.payload.shape[0]

    def ambient(self, cap: int = DEFAULT_CAP) -> np.ndarray:
        if self.ambient_dim > cap:
            raise ResourceCapError(f"ambient dimension {self.ambient_dim} exceeds cap {cap}")
        return lift_matrix(self.payload, self.positions(), len(self.assignment.strings), self.N)

    def __matmul__(self, other: TensorOperand) -> TensorOperand:
        sup = tuple(s for s in self.assignment.strings if s in self.support or s in other.support)
        return TensorOperand(self.assignment, sup, lift(self, sup).payload @ lift(other, sup).payload, self.N)


@dataclass(frozen=True)
class ColourPermutations:
    """One permutation of ``[N]^{S_c}`` per colour, drawn for ``(seed, trial)``."""

    perms: Mapping[str, np.ndarray]
    seed: int
    trial: int = 0

    def __getitem__(self, c: str) -> np.ndarray:
        return self.perms[c]

    def __contains__(self, c: object) -> bool:
        return c in self.perms

    def relabelled(self, tau: Mapping[str, np.ndarray]) -> ColourPermutations:
        """Compose each permutation with a fixed relabelling ``tau[c]``."""
        return ColourPermutations({c: np.asarray(tau[c])[p] for c, p in self.perms.items()}, self.seed, self.trial)


def colour_generator(seed: int, trial: int, colour_index: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, trial, colour)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial, colour_index))
    return np.random.Generator(np.random.Philox(ss))


def draw_permutations(A: StringAssignment, N: int, seed: int, trial: int = 0) -> ColourPermutations:
    perms = {}
    for j, c in enumerate(A.colours):
        rng = colour_generator(seed, trial, j)
        perms[c] = rng.permutation(N ** len(A.strings_of(c)))
    return ColourPermutations(perms, seed, trial)


def lift(x: TensorOperand, target_support: Sequence[str]) -> TensorOperand:
    """Tensor ``x`` with identities on the extra strings of ``target_support``."""
    target = tuple(s for s in x.assignment.strings if s in set(target_support))
    if set(target) != set(target_support):
        raise ValueError("target support has unknown strings")
    if not set(x.support) <= set(target):
        raise ValueError("support is not contained in the target support")
    pos = [target.index(s) for s in x.support]
    return TensorOperand(x.assignment, target, lift_matrix(x.payload, pos, len(target), x.N), x.N)


def conjugate(x: TensorOperand, perms: ColourPermutations | Mapping[str, np.ndarray], c: str) -> TensorOperand:
    """``S_c^T X S_c`` for the permutation matrix of colour ``c``."""
    if tuple(x.support) != x.assignment.strings_of(c):
        raise ValueError(f"operand support {x.support} is not the string set of colour {c}")
    sigma = np.asarray(perms[c])
    if sigma.shape != (x.payload.shape[0],):
        raise ValueError("permutation length does not match the operand")
    return TensorOperand(x.assignment, x.support, conjugate_by(x.payload, sigma), x.N)


def delta(x: TensorOperand) -> TensorOperand:
    """Conditional expectation onto the diagonal (commutes with lifting)."""
    return TensorOperand(x.assignment, x.support, np.diag(np.diag(x.payload)), x.N)


# ---------------------------------------------------------------------------
# centred words


Factor = tuple[Any, Any]  # (diagonal or None, TensorOperand or matrix on S_c)


def _as_operand(A: StringAssignment, c: str, X: Any, N: int) -> TensorOperand:
    if isinstance(X, TensorOperand):
        if tuple(X.support) != A.strings_of(c):
            raise ValueError(f"operand for colour {c} must act on {A.strings_of(c)}")
        return X
    return TensorOperand.on_colour(A, c, np.asarray(X), N)


class _LegOperator:
    """Matrix-free action of a word block on batches of ambient vectors."""

    def __init__(self, A: StringAssignment, N: int, factors: list[tuple[np.ndarray | None, TensorOperand]]) -> None:
        self.m = len(A.strings)
        self.N = N
        self.factors = factors

    def _apply_leg(self, V: np.ndarray, x: TensorOperand) -> np.ndarray:
        k = len(x.support)
        pos = x.positions()
        t = x.payload.reshape((self.N,) * (2 * k))
        axes_v = [1 + p for p in pos]
        out = np.tensordot(V, t, axes=(axes_v, list(range(k, 2 * k))))
        # tensordot appends the new legs at the end; move them back in place
        rest = [a for a in range(1 + self.m) if a not in axes_v]
        current = rest + axes_v
        return out.transpose(np.argsort(current))

    def apply(self, V: np.ndarray) -> np.ndarray:
        shape = V.shape
        V = V.reshape((shape[0],) + (self.N,) * self.m)
        for d, x in reversed(self.factors):
            V = self._apply_leg(V, x)
            if d is not None:
                V = V * d.reshape((1,) + (self.N,) * self.m)
        return V.reshape(shape)


def centered_word_norm(
    words: Sequence[tuple[str, Sequence[Factor]]],
    perms: ColourPermutations | Mapping[str, np.ndarray],
    N: int,
    A: StringAssignment,
    G: ColourGraph | None = None,
    cap: int = DEFAULT_CAP,
    R: float | None = None,
    chunk: int = 256,
) -> float:
    """``||Delta[(Y_1 - Delta Y_1) ... (Y_k - Delta Y_k)]||_2`` with ``Y_i = L_{i,1} X_{i,1} ... L_{i,l} X_{i,l}``.

    ``words[i] = (colour, [(L, X), ...])`` where ``L`` is ``None`` or an ambient
    diagonal and ``X`` acts on the strings of the colour; each ``X`` is
    conjugated by that colour's permutation.  The colour sequence must be
    reduced for ``G`` (default: the graph induced by ``A``).  Dense ambient
    matrices are used up to dimension ``cap``; beyond it the diagonal is
    computed matrix-free in chunks of basis vectors.
    """
    if not words:
        raise ValueError("empty word")
    G = G if G is not None else A.induced_graph()
    colours = [c for c, _ in words]
    if not is_g_reduced(colours, G):
        raise ValueError(f"colour word {colours} is not reduced for the colour graph")
    M = N ** len(A.strings)
    blocks: list[list[tuple[np.ndarray | None, TensorOperand]]] = []
    for c, factors in words:
        blk = []
        for L, X in factors:
            x = conjugate(_as_operand(A, c, X, N), perms, c)
            if R is not None and np.linalg.norm(x.payload, 2) > R * (1 + 1e-9):
                raise ValueError(f"operand of colour {c} exceeds the declared norm bound {R}")
            d = None
            if L is not None:
                d = np.asarray(L)
                d = np.diagonal(d) if d.ndim == 2 else d
                if d.shape != (M,):
                    raise ValueError(f"diagonal has length {d.shape}, expected {M}")
                if R is not None and np.max(np.abs(d)) > R * (1 + 1e-9):
                    raise ValueError("diagonal exceeds the declared norm bound")
            blk.append((d, x))
        blocks.append(blk)
    if M <= cap:
        W = np.eye(M, dtype=complex)
        for blk in blocks:
            Y = np.eye(M, dtype=complex)
            for d, x in blk:
                if d is not None:
                    Y = Y * d[None, :]
                Y = Y @ x.ambient(cap)
            Y = Y - np.diag(np.diag(Y))
            W = W @ Y
        diag = np.diag(W)
        if R is not None:
            bound = 2.0 ** len(blocks) * math.prod(R ** (2 * len(b)) for b in blocks)
            if np.max(np.abs(diag)) > bound * (1 + 1e-9):
                raise ValueError("intermediate product exceeds the norm bound")
        return float(np.sqrt(np.mean(np.abs(diag) ** 2)))
    return _centered_word_norm_legwise(blocks, A, N, chunk)


def _centered_word_norm_legwise(blocks, A: StringAssignment, N: int, chunk: int) -> float:
    M = N ** len(A.strings)
    ops = [_LegOperator(A, N, blk) for blk in blocks]
    # diagonals of each block
    diags = []
    for blk, op in zip(blocks, ops):
        if all(d is None for d, _ in blk):
            prod = blk[0][1]
            for _, x in blk[1:]:
                prod = prod @ x
            pos = prod.positions()
            diags.append(lift_diagonal(np.diag(prod.payload).astype(complex), pos, len(A.strings), N))
        else:
            dg = np.empty(M, dtype=complex)
            for start in range(0, M, chunk):
                idx = np.arange(start, min(M, start + chunk))
                V = np.zeros((len(idx), M), dtype=complex)
                V[np.arange(len(idx)), idx] = 1.0
                dg[idx] = op.apply(V)[np.arange(len(idx)), idx]
            diags.append(dg)
    total = 0.0
    for start in range(0, M, chunk):
        idx = np.arange(start, min(M, start + chunk))
        V = np.zeros((len(idx), M), dtype=complex)
        V[np.arange(len(idx)), idx] = 1.0
        for op, dg in zip(reversed(ops), reversed(diags)):
            V = op.apply(V) - V * dg[None, :]
        total += float(np.sum(np.abs(V[np.arange(len(idx)), idx]) ** 2))
    return float(np.sqrt(total / M))


# ---------------------------------------------------------------------------
# concentration and trial counts


def concentration_tail(N: int, string_counts: Sequence[int], eps: float, lipschitz: float) -> float:
    """``2 * sum_j exp(-N**#S_j * eps**2 / (64 m**2 L**2))`` over the ``m`` colours of a word."""
    m = len(string_counts)
    return min(1.0, 2.0 * sum(math.exp(-(N**k) * eps**2 / (64 * m**2 * lipschitz**2)) for k in string_counts))


def trials_for_median(tail: float, delta: float, min_trials: int = 20, max_trials: int = 2000) -> int:
    """Trials after which the sample median is within ``eps`` with probability ``1 - delta``.

    If each trial deviates with probability ``tail < 1/2``, Hoeffding bounds the
    chance that half of them deviate by ``exp(-2 T (1/2 - tail)**2)``.
    """
    if tail >= 0.5:
        return max_trials
    need = math.ceil(math.log(1 / delta) / (2 * (0.5 - tail) ** 2))
    return int(min(max_trials, max(min_trials, need)))


# ---------------------------------------------------------------------------
# microstates for graph products


def pad_to(X: np.ndarray, N: int) -> np.ndarray:
    """``X`` tensored with the identity of size ``N / dim X``."""
    n = X.shape[0]
    if N % n:
        raise ValueError(f"dimension {n} does not divide {N}")
    return np.kron(X, np.eye(N // n, dtype=X.dtype)) if N != n else X


def graph_product_microstates(
    A: StringAssignment,
    per_colour: Mapping[str, Sequence[np.ndarray]],
    N: int | None = None,
    perms: ColourPermutations | Mapping[str, np.ndarray] | None = None,
) -> dict[str, list[TensorOperand]]:
    """Lift per-colour matrix tuples into the permutation model.

    Colour ``c``'s matrices are padded to size ``N`` and placed on the first
    string of ``S_c`` (identity on its other strings), then conjugated by the
    colour's permutation.  ``N`` defaults to the product of the base sizes.
    """
    dims = {c: {np.asarray(X).shape[0] for X in xs} for c, xs in per_colour.items()}
    for c, ds in dims.items():
        if len(ds) != 1:
            raise ValueError(f"colour {c} mixes matrix sizes {sorted(ds)}")
    if N is None:
        N = math.prod(next(iter(ds)) for ds in dims.values())
    out: dict[str, list[TensorOperand]] = {}
    for c, xs in per_colour.items():
        ss = A.strings_of(c)
        ops = []
        for X in xs:
            base = pad_to(np.asarray(X), N)
            payload = lift_matrix(base, [0], len(ss), N)
            x = TensorOperand(A, ss, payload, N)
            if perms is not None:
                x = conjugate(x, perms, c)
            ops.append(x)
        out[c] = ops
    return out


# ---------------------------------------------------------------------------
# experiment driver


@dataclass(frozen=True)
class ExperimentRow:
    word: str
    N: int
    trials: int
    mean: float
    median: float
    std: float
    max: float
    path_decrease_fraction: float
    concentration_tail: float
    samples: tuple[float, ...] = field(default=(), repr=False)


def _resolve_assignment(config: Mapping[str, Any]) -> tuple[ColourGraph, StringAssignment]:
    g = config["graph"]
    G = ColourGraph.from_pairs(g["colours"], g.get("edges", []))
    if config.get("strings"):
        A = StringAssignment.from_colours_of(config["strings"], list(G.colours))
        problems = A.check(G)
        if problems:
            raise ValueError("strings: " + "; ".join(problems))
    elif config.get("string_construction", "pairs") == "minimal":
        A = minimize_strings(G)
    else:
        A = build_string_assignment(G)
    return G, A


def _generator_matrices(spec: Mapping[str, Any], rng_factory: Callable[[], np.random.Generator]) -> list[np.ndarray]:
    src = spec["source"]
    if src == "crossed_product":
        from .algnum import crossed_product_microstate

        n = int(spec["n"])
        mats = crossed_product_microstate(n)
        picks = spec.get("elements", [[1, 0], [0, 1]])
        out = []
        for pick in picks:
            # either [chi, g] or a list of [coefficient, chi, g] terms
            terms = [[1, *pick]] if isinstance(pick[0], (int, float)) else pick
            out.append(sum(complex(a) * mats[(int(chi) % n) * n + int(g) % n].to_complex() for a, chi, g in terms))
        return out
    if src == "matrices":
        return [np.array(m, dtype=complex) for m in spec["matrices"]]
    if src == "random_unitary":
        rng = rng_factory()
        d = int(spec["dim"])
        out = []
        for _ in range(int(spec.get("count", 1))):
            z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            q, r = np.linalg.qr(z)
            out.append(q * (np.diag(r) / np.abs(np.diag(r)))[None, :])
        return out
    raise ValueError(f"unknown generator source {src!r}")


def independence_experiment(config: Mapping[str, Any], progress: Callable[[str], None] | None = None, workers: int = 1) -> list[ExperimentRow]:
    """Median decay of centred reduced words over an ``N`` schedule.

    ``config`` keys: ``graph`` (colours, edges), optional ``strings``,
    ``generators`` (per colour), ``words`` (lists of ``[colour, [letters]]``),
    ``N_schedule``, ``trials`` (integer or ``"auto"``), ``seed``, optional
    ``norm_cap``, ``statistic`` (``"squared"`` or ``"norm"``), ``cap``.
    """
    G, A = _resolve_assignment(config)
    seed = int(config["seed"])
    gens = {
        c: _generator_matrices(spec, lambda c=c: colour_generator(seed, 2**31 - 1, A.colours.index(c)))
        for c, spec in config["generators"].items()
    }
    squared = config.get("statistic", "squared") == "squared"
    cap = int(config.get("cap", DEFAULT_CAP))
    R = config.get("norm_cap")
    schedule = [int(n) for n in config["N_schedule"]]
    rows: list[ExperimentRow] = []
    for word in config["words"]:
        label = "".join(f"{c}{list(letters)}" for c, letters in word)
        counts = [len(A.strings_of(c)) for c in dict.fromkeys(c for c, _ in word)]
        per_N: list[np.ndarray] = []
        tails = []
        for N in schedule:
            M = N ** len(A.strings)
            if M > int(config.get("max_ambient", 1 << 16)):
                raise ResourceCapError(f"ambient dimension {M} exceeds max_ambient")
            tail = concentration_tail(N, counts, float(config.get("epsilon", 0.1)), float(config.get("lipschitz", 1.0)))
            tails.append(tail)
            trials = config.get("trials", 20)
            if trials == "auto":
                trials = trials_for_median(tail, float(config.get("delta", 0.05)), int(config.get("min_trials", 20)), int(config.get("max_trials", 2000)))
            factors = []
            for c, letters in word:
                padded = [pad_to(gens[c][int(l)], N) for l in letters]
                ops = [TensorOperand(A, A.strings_of(c), lift_matrix(X, [0], len(A.strings_of(c)), N), N) for X in padded]
                factors.append((c, [(None, x) for x in ops]))

            def one_trial(t: int, N: int = N, factors: list = factors) -> float:
                v = centered_word_norm(factors, draw_permutations(A, N, seed, t), N, A, G, cap=cap, R=R)
                return v * v if squared else v

            if workers > 1:
                # map preserves trial order, so results do not depend on scheduling
                with ThreadPoolExecutor(workers) as pool:
                    vals = np.array(list(pool.map(one_trial, range(int(trials)))))
            else:
                vals = np.array([one_trial(t) for t in range(int(trials))])
            per_N.append(vals)
            if progress:
                progress(f"{label} N={N} trials={len(vals)} median={np.median(vals):.6g}")
        # per-sample-path trend: fraction of consecutive N steps that decrease
        common = min(len(v) for v in per_N)
        if len(schedule) > 1 and common:
            paths = np.stack([v[:common] for v in per_N])
            dec = float(np.mean(np.diff(paths, axis=0) < 0))
        else:
            dec = float("nan")
        for N, vals, tail in zip(schedule, per_N, tails):
            rows.append(ExperimentRow(label, N, len(vals), float(np.mean(vals)), float(np.median(vals)), float(np.std(vals)), float(np.max(vals)), dec, tail, tuple(float(x) for x in vals)))
    return rows
