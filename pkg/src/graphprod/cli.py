"""Batch experiment runner: ``graphprod <subcommand> [--config FILE] [--seed S] [--out PATH]``.

Configs are JSON documents ``{"schema": "graphprod.config/1", "kind": ...,
"seed": ..., "params": {...}}`` validated against a per-kind JSON schema.
Every run writes a CSV (atomically when ``--out`` is given) and a manifest with
the config hash, seed and library versions.  The thread count comes from the
``GRAPHPROD_THREADS`` environment variable; results never depend on it.

Exit status: 0 on success, 1 when a computed check fails, 2 on invalid input
(with the offending field path), 3 when a resource cap is exceeded.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import metadata, resources
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import jsonschema
import numpy as np

from . import __version__
from .errors import ResourceCapError

CONFIG_SCHEMA = "graphprod.config/1"
MANIFEST_SCHEMA = "graphprod.manifest/1"
THREADS_ENV = "GRAPHPROD_THREADS"

KINDS = (
    "assign-strings",
    "traffic-expect",
    "traffic-mc",
    "simulate",
    "independence-test",
    "detplus",
    "microstates",
    "df-experiment",
)


class InputError(ValueError):
    """Invalid user input; ``path`` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


class CheckFailed(RuntimeError):
    """A computed verdict came out negative; the output is still written."""


# ---------------------------------------------------------------------------
# schemas

_INT = {"type": "integer"}
_POS = {"type": "integer", "minimum": 1}
_STR_LIST = {"type": "array", "items": {"type": "string"}}
_GRAPH = {
    "type": "object",
    "required": ["colours"],
    "properties": {
        "colours": {"type": "array", "items": {"type": "string"}, "minItems": 1, "uniqueItems": True},
        "edges": {"type": "array", "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}},
    },
    "additionalProperties": False,
}
_STRINGS = {"type": "object", "additionalProperties": _STR_LIST}
_ELEMENT = {
    "oneOf": [
        {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
        {"type": "array", "minItems": 1, "items": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}},
    ]
}
_GENERATOR = {
    "type": "object",
    "required": ["source"],
    "properties": {
        "source": {"enum": ["crossed_product", "matrices", "random_unitary"]},
        "n": _POS,
        "elements": {"type": "array", "items": _ELEMENT},
        "matrices": {"type": "array"},
        "dim": _POS,
        "count": _POS,
    },
}
_FIXTURE_REF = {"type": "string", "minLength": 1}
_PAYLOADS = {
    "type": "object",
    "properties": {
        "source": {"enum": ["random", "identity", "matrices"]},
        "matrices": {"type": "object"},
    },
    "additionalProperties": False,
}
_EXPERIMENT = {
    "type": "object",
    "required": ["graph", "generators", "words", "N_schedule"],
    "properties": {
        "graph": _GRAPH,
        "strings": _STRINGS,
        "string_construction": {"enum": ["pairs", "minimal"]},
        "generators": {"type": "object", "additionalProperties": _GENERATOR},
        "words": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "array", "prefixItems": [{"type": "string"}, {"type": "array", "items": _INT}], "minItems": 2, "maxItems": 2},
            },
        },
        "N_schedule": {"type": "array", "items": _POS, "minItems": 1},
        "trials": {"oneOf": [_POS, {"const": "auto"}]},
        "norm_cap": {"type": "number", "exclusiveMinimum": 0},
        "statistic": {"enum": ["squared", "norm"]},
        "cap": _POS,
        "max_ambient": _POS,
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "lipschitz": {"type": "number", "exclusiveMinimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "min_trials": _POS,
        "max_trials": _POS,
    },
    "additionalProperties": False,
}
_MATRIX_DOC = {
    "type": "object",
    "required": ["conductor", "entries"],
    "properties": {
        "name": {"type": "string"},
        "conductor": _POS,
        "entries": {"type": "array", "items": {"type": "array", "items": {"oneOf": [_INT, {"type": "array", "items": _INT}]}}},
    },
    "additionalProperties": False,
}
_MICROSTATE_SPEC = {
    "type": "object",
    "required": ["source", "n"],
    "properties": {
        "source": {"const": "crossed_product"},
        "n": {"type": "array", "items": _POS, "minItems": 1},
        "elements": {"type": "array", "items": _ELEMENT},
    },
    "additionalProperties": False,
}

PARAM_SCHEMAS: dict[str, dict] = {
    "assign-strings": {
        "type": "object",
        "required": ["graph"],
        "properties": {"graph": _GRAPH, "construction": {"enum": ["pairs", "minimal"]}},
        "additionalProperties": False,
    },
    "traffic-expect": {
        "type": "object",
        "required": ["fixture", "N"],
        "properties": {
            "fixture": _FIXTURE_REF,
            "N": _POS,
            "mode": {"enum": ["exact", "leading"]},
            "strings": _STRINGS,
            "payloads": _PAYLOADS,
        },
        "additionalProperties": False,
    },
    "traffic-mc": {
        "type": "object",
        "required": ["fixture", "N", "trials"],
        "properties": {
            "fixture": _FIXTURE_REF,
            "N": _POS,
            "trials": _POS,
            "strings": _STRINGS,
            "payloads": _PAYLOADS,
        },
        "additionalProperties": False,
    },
    "simulate": _EXPERIMENT,
    "independence-test": _EXPERIMENT,
    "detplus": {
        "type": "object",
        "properties": {
            "matrices": {"type": "array", "items": _MATRIX_DOC},
            "random": {
                "type": "object",
                "required": ["count"],
                "properties": {
                    "count": _POS,
                    "conductors": {"type": "array", "items": _POS, "minItems": 1},
                    "max_size": _POS,
                    "bound": _POS,
                },
                "additionalProperties": False,
            },
            "certificates": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["poly", "microstates"],
                    "properties": {
                        "poly": {"type": "string"},
                        "self_adjoint": {"type": "boolean"},
                        "microstates": _MICROSTATE_SPEC,
                    },
                    "additionalProperties": False,
                },
            },
            "rtol": {"type": "number", "exclusiveMinimum": 0},
        },
        "additionalProperties": False,
    },
    "microstates": {
        "type": "object",
        "required": ["n"],
        "properties": {"n": {"type": "array", "items": _POS, "minItems": 1}},
        "additionalProperties": False,
    },
    "df-experiment": {
        "type": "object",
        "required": ["r", "microstates"],
        "properties": {
            "r": _POS,
            "relations": _STR_LIST,
            "microstates": _MICROSTATE_SPEC,
            "rtol": {"type": "number", "exclusiveMinimum": 0},
        },
        "additionalProperties": False,
    },
}

ENVELOPE_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind", "params"],
    "properties": {
        "schema": {"const": CONFIG_SCHEMA},
        "kind": {"enum": list(KINDS)},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "params": {"type": "object"},
    },
    "additionalProperties": False,
}


def _error_path(err: jsonschema.ValidationError, prefix: str) -> str:
    out = prefix
    for p in err.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out or "$"


def validate_config(doc: Any) -> dict:
    """Check the envelope and the kind-specific parameters; raise :class:`InputError`."""
    try:
        jsonschema.validate(doc, ENVELOPE_SCHEMA, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as err:
        raise InputError(_error_path(err, ""), err.message) from None
    try:
        jsonschema.validate(doc["params"], PARAM_SCHEMAS[doc["kind"]], cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as err:
        raise InputError(_error_path(err, "params"), err.message) from None
    return doc


def shipped_configs() -> list[str]:
    root = resources.files("graphprod.data").joinpath("configs")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(ref: str) -> dict:
    """Load a config from a path or by the name of a shipped config."""
    path = Path(ref)
    if path.exists():
        text = path.read_text()
    elif ref in shipped_configs():
        text = resources.files("graphprod.data").joinpath("configs", f"{ref}.json").read_text()
    else:
        raise InputError("--config", f"no such file or shipped config {ref!r}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"--config line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return validate_config(doc)


# ---------------------------------------------------------------------------
# output


def _fmt(x: Any) -> str:
    if isinstance(x, bool) or x is None:
        return {True: "true", False: "false", None: ""}[x]
    if isinstance(x, (float, np.floating)):
        return repr(float(x) + 0.0)  # prints -0.0 as 0.0
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _canonical(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def build_manifest(config: Mapping[str, Any], csv_text: str, out_name: str | None) -> dict:
    return {
        "schema": MANIFEST_SCHEMA,
        "kind": config["kind"],
        "seed": config.get("seed"),
        "config_sha256": hashlib.sha256(_canonical(config).encode()).hexdigest(),
        "config": config,
        "output": out_name,
        "output_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
        "versions": {
            "graphprod": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "jsonschema": metadata.version("jsonschema"),
        },
    }


# ---------------------------------------------------------------------------
# helpers


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(THREADS_ENV, f"expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(THREADS_ENV, "must be at least 1")
    return n


def _ordered_map(fn: Callable[[Any], Any], items: Sequence[Any], workers: int) -> list[Any]:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=key)))


def _load_fixture_ref(ref: str):
    from .fixtures import FixtureError, load_fixture, parse_fixture

    if ref == "appendix":
        text = resources.files("graphprod.data").joinpath("appendix_example.json").read_text()
        return parse_fixture(json.loads(text))
    try:
        return load_fixture(ref)
    except FileNotFoundError:
        raise InputError("params.fixture", f"no such file {ref!r}") from None
    except FixtureError as exc:
        raise InputError(f"params.fixture: {exc.path}", str(exc)) from None


def _assignment_for(fx, params: Mapping[str, Any]):
    from .digraphs import StringAssignment, build_string_assignment

    T = fx.digraph
    if params.get("strings"):
        colours = list(fx.colour_graph.colours) if fx.colour_graph else list(T.colours)
        try:
            A = StringAssignment.from_colours_of(params["strings"], colours)
        except ValueError as exc:
            raise InputError("params.strings", str(exc)) from None
    elif fx.assignment is not None:
        A = fx.assignment
    elif fx.colour_graph is not None:
        A = build_string_assignment(fx.colour_graph)
    else:
        raise InputError("params.strings", "fixture has no strings or colour graph; give params.strings")
    if fx.colour_graph is not None:
        problems = A.check(fx.colour_graph)
        if problems:
            raise InputError("params.strings", "; ".join(problems))
    missing = set(T.colours) - set(A.colours)
    if missing:
        raise InputError("params.strings", f"edge colours without strings: {sorted(missing)}")
    return A


def _attach_payloads(T, A, N: int, spec: Mapping[str, Any], seed: int):
    """Numeric matrices for every edge and loop handle of ``T``."""
    source = spec.get("source", "random")
    M = N ** len(A.strings)
    edge_dims: dict[Any, int] = {}
    for e in T.edges:
        edge_dims[e.label] = N ** len(A.strings_of(e.colour))
    loop_handles = sorted({h for f in T.loop_labels.values() for h in f}, key=str)
    payloads: dict[Any, np.ndarray] = {}
    if source == "matrices":
        given = spec.get("matrices", {})
        for h in list(edge_dims) + loop_handles:
            if str(h) not in given:
                raise InputError(f"params.payloads.matrices.{h}", "missing")
            payloads[h] = np.array(given[str(h)], dtype=complex)
        return T.with_payloads(payloads)
    for k, h in enumerate(sorted(edge_dims, key=str)):
        d = edge_dims[h]
        if source == "identity":
            payloads[h] = np.eye(d)
        else:
            payloads[h] = _stream(seed, 1, k).normal(size=(d, d)) / np.sqrt(d)
    for k, h in enumerate(loop_handles):
        payloads[h] = np.ones(M) if source == "identity" else _stream(seed, 2, k).normal(size=M)
    return T.with_payloads(payloads)


def _complex_cells(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _format_pi(T, pi) -> str:
    parts = []
    for s, p in pi.items():
        blocks = "".join("{" + ",".join(T.names[v] for v in b) + "}" for b in p.blocks)
        parts.append(f"{s}:{blocks}")
    return "; ".join(parts)


def _microstate_tuple(spec: Mapping[str, Any], n: int):
    """Exact crossed-product microstates at size ``n**2`` for the requested elements."""
    from .algnum import CycMatrix, crossed_product_index, crossed_product_microstate

    mats = crossed_product_microstate(n)
    out = []
    for el in spec.get("elements", [[1, 0], [0, 1]]):
        terms = [[1, *el]] if isinstance(el[0], int) else el
        acc = CycMatrix.zeros(n * n, n * n)
        for a, chi, g in terms:
            if float(a) != int(a):
                raise InputError("params.microstates.elements", "coefficients must be integers")
            acc = acc + mats[crossed_product_index(n, int(chi), int(g))].scale(int(a))
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# subcommands


def run_assign_strings(params: Mapping[str, Any], seed: int, workers: int):
    from .digraphs import ColourGraph, build_string_assignment, minimize_strings

    g = params["graph"]
    try:
        G = ColourGraph.from_pairs(g["colours"], g.get("edges", []))
    except ValueError as exc:
        raise InputError("params.graph", str(exc)) from None
    A = minimize_strings(G) if params.get("construction", "pairs") == "minimal" else build_string_assignment(G)
    problems = A.check(G)
    if problems:
        raise CheckFailed("; ".join(problems))
    rows = [[s, " ".join(A.colours_of(s))] for s in A.strings]
    return ["string", "colours_on_string"], rows


def run_traffic_expect(params: Mapping[str, Any], seed: int, workers: int):
    from .traffic import expected_trace

    fx = _load_fixture_ref(params["fixture"])
    A = _assignment_for(fx, params)
    N = int(params["N"])
    T = _attach_payloads(fx.digraph, A, N, params.get("payloads", {}), seed)
    mode = params.get("mode", "exact")
    try:
        rep = expected_trace(T, A, N, mode=mode)
    except ValueError as exc:
        raise InputError("params.fixture", str(exc)) from None
    quantity = "expected_gamma" if mode == "exact" else "leading_term"
    rows = [[_format_pi(T, pi), *_complex_cells(v)] for pi, v in rep.term_breakdown.items()]
    rows.append(["total", *_complex_cells(rep.value)])
    return ["partition_tuple", f"{quantity}_real", f"{quantity}_imag"], rows


def run_traffic_mc(params: Mapping[str, Any], seed: int, workers: int):
    from .permmodel import draw_permutations
    from .traffic import trace_tau

    fx = _load_fixture_ref(params["fixture"])
    A = _assignment_for(fx, params)
    N = int(params["N"])
    T = _attach_payloads(fx.digraph, A, N, params.get("payloads", {}), seed)
    trials = int(params["trials"])
    vals = _ordered_map(lambda t: complex(trace_tau(T, N, A, draw_permutations(A, N, seed, t))), list(range(trials)), workers)
    rows = [[str(t), *_complex_cells(v)] for t, v in enumerate(vals)]
    arr = np.array(vals)
    rows.append(["mean", *_complex_cells(arr.mean())])
    se = arr.std(ddof=1) / np.sqrt(trials) if trials > 1 else float("nan")
    rows.append(["stderr", float(se), 0.0])
    return ["trial", "trace_tau_real", "trace_tau_imag"], rows


def _experiment_config(params: Mapping[str, Any], seed: int) -> dict:
    cfg = dict(params)
    cfg["seed"] = seed
    return cfg


def _run_experiment(params: Mapping[str, Any], seed: int, workers: int):
    from .permmodel import independence_experiment

    try:
        return independence_experiment(_experiment_config(params, seed), workers=workers)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ResourceCapError):
            raise
        raise InputError("params", str(exc)) from None


def _statistic_name(params: Mapping[str, Any]) -> str:
    return "centered_word_2norm_sq" if params.get("statistic", "squared") == "squared" else "centered_word_2norm"


def run_simulate(params: Mapping[str, Any], seed: int, workers: int):
    rows = []
    for r in _run_experiment(params, seed, workers):
        for t, v in enumerate(r.samples):
            rows.append([r.word, r.N, t, v])
    return ["word", "N", "trial", _statistic_name(params)], rows


def run_independence_test(params: Mapping[str, Any], seed: int, workers: int):
    res = _run_experiment(params, seed, workers)
    stat = _statistic_name(params)
    by_word: dict[str, list] = {}
    for r in res:
        by_word.setdefault(r.word, []).append(r)
    rows = []
    failed = []
    for word, rs in by_word.items():
        meds = [r.median for r in rs]
        decreasing = all(a > b for a, b in zip(meds, meds[1:]))
        quarter = meds[-1] < meds[0] / 4 if len(meds) > 1 else False
        if not (decreasing and quarter):
            failed.append(word)
        for r in rs:
            rows.append([r.word, r.N, r.trials, r.mean, r.median, r.std, r.max, r.path_decrease_fraction, r.concentration_tail, decreasing, quarter])
    header = [
        "word", "N", "trials", f"{stat}_mean", f"{stat}_median", f"{stat}_std", f"{stat}_max",
        "path_decrease_fraction", "concentration_tail_bound", "median_strictly_decreasing", "last_median_below_quarter_of_first",
    ]
    return header, rows, (f"median decay not observed for {failed}" if failed else None)


def run_detplus(params: Mapping[str, Any], seed: int, workers: int):
    from .algnum import CycMatrix, det_plus_report, galois_orbit, lemma31_bound, liminf_certificate, random_cyc_matrix
    from .freeprob import PolyParseError, parse_poly

    rtol = params.get("rtol")
    items: list[tuple[str, Any]] = []
    for k, doc in enumerate(params.get("matrices", [])):
        try:
            X = CycMatrix.from_document(doc)
        except ValueError as exc:
            raise InputError(f"params.matrices[{k}]", str(exc)) from None
        if X.rows != X.cols:
            raise InputError(f"params.matrices[{k}]", "matrix must be square")
        items.append((doc.get("name", f"matrix{k}"), X))
    rnd = params.get("random")
    if rnd:
        conds = rnd.get("conductors", [1, 2, 3, 4, 6])
        for k in range(int(rnd["count"])):
            rng = _stream(seed, 3, k)
            m = int(conds[int(rng.integers(len(conds)))])
            n = int(rng.integers(1, int(rnd.get("max_size", 6)) + 1))
            items.append((f"random{k}", random_cyc_matrix(rng, n, m, int(rnd.get("bound", 2)))))

    def one(item):
        name, X = item
        orb = galois_orbit(X)
        rep = det_plus_report(X, rtol)
        root = rep.value ** (1.0 / X.rows)
        bound = lemma31_bound(orb)
        return [name, X.rows, orb.base.m, orb.orbit_size, orb.norm_bound, rep.value, root, bound, root >= bound * (1 - 1e-9), False, rep.rank, rep.smallest_kept, rep.largest_dropped]

    rows = _ordered_map(one, items, workers)
    for j, cert in enumerate(params.get("certificates", [])):
        spec = cert["microstates"]
        ns = spec["n"]
        seqs = [_microstate_tuple(spec, n) for n in ns]
        r = len(seqs[0])
        try:
            P = parse_poly(cert["poly"], r, bool(cert.get("self_adjoint", False)))
        except PolyParseError as exc:
            raise InputError(f"params.certificates[{j}].poly", str(exc)) from None
        table = liminf_certificate(seqs, P, rtol)
        for n, row in zip(ns, table.rows):
            rows.append([f"{cert['poly']} @ n={n}", row.size, seqs[ns.index(n)][0].m, row.d, row.C, row.det_plus_root ** row.size, row.det_plus_root, table.uniform_bound, row.det_plus_root >= table.uniform_bound * (1 - 1e-9), row.degenerate, None, None, None])
    header = ["name", "size", "conductor", "orbit_size_d", "norm_bound_C", "det_plus", "det_plus_root", "lemma_bound", "bound_holds", "degenerate", "rank", "smallest_kept_singular_value", "largest_dropped_singular_value"]
    failed = [r[0] for r in rows if not r[8]]
    return header, rows, (f"determinant bound violated for {failed}" if failed else None)


def run_microstates(params: Mapping[str, Any], seed: int, workers: int):
    from .algnum import CycMatrix, crossed_product_index, crossed_product_microstate, zeta

    rows = []
    failed = []
    for n in params["n"]:
        if n > 12:
            raise ResourceCapError(f"crossed-product size n={n} exceeds the limit 12")
        mats = crossed_product_microstate(n)
        I = CycMatrix.identity(n * n)
        U = mats[crossed_product_index(n, 1, 0)]
        V = mats[crossed_product_index(n, 0, 1)]
        for chi in range(n):
            for g in range(n):
                X = mats[crossed_product_index(n, chi, g)]
                trace = X.trace() * Fraction(1, n * n)
                expected = 1 if (chi, g) == (0, 0) else 0
                diag = {tuple(X.data[i, i]) for i in range(X.rows)}
                nz = X.to_complex() != 0
                gen_perm = bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))
                roots = all(abs(abs(z) - 1) < 1e-12 for z in X.to_complex()[nz]) and all(
                    any(X.entry(i, j) == zeta(n, k) for k in range(n)) for i, j in zip(*np.nonzero(nz))
                )
                factorises = X == U.power(chi) @ V.power(g)
                covariant = V.power(g) @ U.power(chi) @ V.power(g).adjoint() == U.power(chi).scale(zeta(n, -chi * g))
                unitary = X @ X.adjoint() == I
                ok = trace == expected and len(diag) == 1 and gen_perm and roots and factorises and covariant and unitary
                if not ok:
                    failed.append((n, chi, g))
                rows.append([n, chi, g, n * n, str(trace.coeffs[0]) if trace.m == 1 else repr(trace), len(diag) == 1, gen_perm, roots, factorises and covariant, unitary])
    header = ["n", "chi", "g", "dimension", "normalized_trace", "diagonal_constant", "generalized_permutation", "entries_roots_of_unity", "crossed_product_relations", "unitary"]
    return header, rows, (f"microstate checks failed for {failed}" if failed else None)


def run_df_experiment(params: Mapping[str, Any], seed: int, workers: int):
    from .freeprob import PolyParseError, build_DF, evaluate_DF, parse_poly, rank_defect_report

    r = int(params["r"])
    rels = []
    for k, text in enumerate(params.get("relations", [])):
        try:
            rels.append(parse_poly(text, r, True))
        except PolyParseError as exc:
            raise InputError(f"params.relations[{k}]", str(exc)) from None
    DF = build_DF(rels, r)
    spec = params["microstates"]
    rows = []
    for n in spec["n"]:
        if n > 4:
            raise ResourceCapError(f"relation matrix for n={n} exceeds the dense size limit")
        X = [A.to_complex() for A in _microstate_tuple(spec, n)]
        if len(X) != r:
            raise InputError("params.microstates.elements", f"expected {r} elements, got {len(X)}")
        for k, A in enumerate(X):
            if not np.allclose(A, A.conj().T):
                raise InputError(f"params.microstates.elements[{k}]", "element is not self-adjoint")
        N = X[0].shape[0]
        M = evaluate_DF(DF, X)
        rep = rank_defect_report(M, N, params.get("rtol"))
        rows.append([n, N, M.shape[0], M.shape[1], rep.kernel_dim, rep.kernel_fraction, rep.det_plus, rep.det_plus ** (1.0 / N**2), rep.smallest_nonzero, rep.threshold])
    header = ["n", "N", "rows", "cols", "kernel_dim", "kernel_fraction", "det_plus", "det_plus_root", "smallest_nonzero_singular_value", "rank_threshold"]
    return header, rows


RUNNERS: dict[str, Callable] = {
    "assign-strings": run_assign_strings,
    "traffic-expect": run_traffic_expect,
    "traffic-mc": run_traffic_mc,
    "simulate": run_simulate,
    "independence-test": run_independence_test,
    "detplus": run_detplus,
    "microstates": run_microstates,
    "df-experiment": run_df_experiment,
}


# ---------------------------------------------------------------------------
# validate


def validate_file(path: str) -> list[list[Any]]:
    """Rows ``(check, passed, detail)`` for a fixture, config or matrix file."""
    from .algnum import CycMatrix
    from .fixtures import DIGRAPH_SCHEMA, FixtureError, parse_fixture, verify_expected

    p = Path(path)
    if not p.exists():
        raise InputError("path", f"no such file {path!r}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} line {exc.lineno}, column {exc.colno}", exc.msg) from None
    rows: list[list[Any]] = []
    if isinstance(doc, dict) and doc.get("schema") == CONFIG_SCHEMA:
        try:
            validate_config(doc)
            rows.append(["config_schema", True, ""])
        except InputError as exc:
            rows.append(["config_schema", False, str(exc)])
        return rows
    if isinstance(doc, dict) and "conductor" in doc:
        try:
            X = CycMatrix.from_document(doc)
            rows.append(["matrix_parse", True, f"{X.rows}x{X.cols} over conductor {X.m}"])
        except (ValueError, KeyError, ResourceCapError) as exc:
            rows.append(["matrix_parse", False, str(exc)])
        return rows
    if not isinstance(doc, dict) or doc.get("schema", DIGRAPH_SCHEMA) != DIGRAPH_SCHEMA:
        rows.append(["document_kind", False, "not a digraph fixture, config or matrix"])
        return rows
    # colour graph symmetry for the adjacency-list form
    cg = doc.get("colour_graph")
    if isinstance(cg, dict) and "adjacency" in cg:
        adj = cg["adjacency"]
        if not isinstance(adj, dict) or not all(isinstance(ns, list) for ns in adj.values()):
            rows.append(["colour_graph_adjacency", False, "adjacency must map each colour to a list of colours"])
            return rows
        asym = sorted((a, b) for a, ns in adj.items() for b in ns if a not in adj.get(b, []))
        loops = sorted(a for a, ns in adj.items() if a in ns)
        rows.append(["colour_graph_symmetric", not asym, f"one-sided edges {asym}" if asym else ""])
        rows.append(["colour_graph_loopless", not loops, f"self-loops on {loops}" if loops else ""])
        if asym or loops:
            return rows
        doc = dict(doc)
        doc["colour_graph"] = {"colours": cg.get("colours", sorted(adj)), "edges": sorted({tuple(sorted((a, b))) for a, ns in adj.items() for b in ns})}
    strings = doc.get("strings")
    if isinstance(strings, dict):
        colours = (doc.get("colour_graph") or {}).get("colours") or sorted({e.get("colour") for e in doc.get("edges", []) if isinstance(e, dict)})
        empty = sorted(c for c in colours if not any(c in cs for cs in strings.values()))
        rows.append(["every_colour_has_strings", not empty, f"empty string sets for {empty}" if empty else ""])
        if empty:
            return rows
    try:
        fx = parse_fixture(doc)
    except FixtureError as exc:
        rows.append(["fixture_parse", False, str(exc)])
        return rows
    rows.append(["fixture_parse", True, f"{fx.digraph.n_vertices} vertices, {len(fx.digraph.edges)} edges"])
    if fx.colour_graph is not None:
        unknown = sorted(set(fx.digraph.colours) - set(fx.colour_graph.colours))
        rows.append(["edge_colours_known", not unknown, f"unknown colours {unknown}" if unknown else ""])
    if fx.assignment is not None and fx.colour_graph is not None:
        problems = fx.assignment.check(fx.colour_graph)
        rows.append(["assignment_matches_colour_graph", not problems, "; ".join(problems)])
    rows.extend([list(r) for r in verify_expected(fx)])
    return rows


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphprod", description="Permutation models for graph products: batch experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="config file or shipped config name")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="CSV output path (manifest written next to it)")
        if kind == "assign-strings":
            p.add_argument("--colours", help="comma-separated colours")
            p.add_argument("--edges", help="comma-separated adjacent pairs such as B-R")
            p.add_argument("--construction", choices=["pairs", "minimal"])
        if kind in ("traffic-expect", "traffic-mc"):
            p.add_argument("--fixture", help="digraph fixture path or 'appendix'")
            p.add_argument("--N", type=int, dest="N")
        if kind == "traffic-expect":
            p.add_argument("--mode", choices=["exact", "leading"])
        if kind == "traffic-mc":
            p.add_argument("--trials", type=int)
        if kind == "detplus":
            p.add_argument("--relations", help="semicolon-separated polynomials certified on crossed-product microstates")
            p.add_argument("--matrix", action="append", default=[], help="matrix file (repeatable)")
        if kind == "microstates":
            p.add_argument("--n", type=int, action="append", help="crossed-product size (repeatable)")
    v = sub.add_parser("validate", help="check a fixture, config or matrix file")
    v.add_argument("path")
    v.add_argument("--out", help="CSV output path")
    sub.add_parser("list-configs", help="print the names of shipped configs")
    return parser


def _config_from_args(args: argparse.Namespace) -> dict:
    if args.config:
        cfg = load_config(args.config)
        if cfg["kind"] != args.command:
            raise InputError("kind", f"config is for {cfg['kind']!r}, not {args.command!r}")
    else:
        cfg = {"schema": CONFIG_SCHEMA, "kind": args.command, "seed": 0, "params": {}}
    params = dict(cfg["params"])
    if args.command == "assign-strings":
        if args.colours:
            params["graph"] = {"colours": args.colours.split(","), "edges": [e.split("-") for e in args.edges.split(",")] if args.edges else []}
        if args.construction:
            params["construction"] = args.construction
    if args.command in ("traffic-expect", "traffic-mc"):
        if args.fixture:
            params["fixture"] = args.fixture
        if args.N is not None:
            params["N"] = args.N
    if args.command == "traffic-expect" and args.mode:
        params["mode"] = args.mode
    if args.command == "traffic-mc" and args.trials is not None:
        params["trials"] = args.trials
    if args.command == "detplus":
        for k, path in enumerate(args.matrix):
            try:
                params.setdefault("matrices", []).append(json.loads(Path(path).read_text()))
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"--matrix[{k}]", str(exc)) from None
        if args.relations:
            params["certificates"] = [
                {"poly": p.strip(), "microstates": {"source": "crossed_product", "n": [2, 3]}}
                for p in args.relations.split(";")
                if p.strip()
            ]
    if args.command == "microstates" and args.n:
        params["n"] = args.n
    cfg = dict(cfg)
    cfg["params"] = params
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    return validate_config(cfg)


def _emit(csv_text: str, manifest: dict, out: str | None) -> None:
    mtext = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    if out:
        path = Path(out)
        _atomic_write(path, csv_text)
        _atomic_write(path.with_name(path.name + ".manifest.json"), mtext)
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(mtext)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list-configs":
            for name in shipped_configs():
                print(name)
            return 0
        if args.command == "validate":
            rows = validate_file(args.path)
            text = render_csv(["check", "passed", "detail"], rows)
            if args.out:
                _atomic_write(Path(args.out), text)
            else:
                sys.stdout.write(text)
            return 0 if all(r[1] for r in rows) else 2
        cfg = _config_from_args(args)
        out = RUNNERS[cfg["kind"]](cfg["params"], int(cfg["seed"]), thread_count())
        header, rows, *rest = out
        failure = rest[0] if rest else None
        text = render_csv(header, rows)
        _emit(text, build_manifest(cfg, text, Path(args.out).name if args.out else None), args.out)
        if failure:
            print(f"graphprod: check failed: {failure}", file=sys.stderr)
            return 1
        return 0
    except InputError as exc:
        print(f"graphprod: invalid input at {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"graphprod: resource limit: {exc}", file=sys.stderr)
        return 3
    except CheckFailed as exc:
        print(f"graphprod: check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
