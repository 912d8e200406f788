"""Noncommutative *-polynomials, laws, free difference quotients and relation matrices.

A polynomial in ``r`` variables is a map from words to coefficients.  A word
is a tuple of letters ``(i, starred)``; self-adjoint variables never carry a
star.  Coefficients are exact :class:`~graphprod.algnum.Cyclotomic` values or
Python complex numbers; mixing the two falls back to complex.

Elements of the algebraic tensor square are :class:`NcBiPoly` maps from
``(left word, right word)`` to coefficients.  Evaluation at matrices sends
``a (x) b`` to ``kron(a(X), b(X).T)``, the usual finite model of ``M (x) M^op``.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .algnum import CycMatrix, Cyclotomic, det_plus_report

__all__ = [
    "Word",
    "NcPoly",
    "NcBiPoly",
    "Law",
    "RankDefectReport",
    "variables",
    "evaluate",
    "evaluate_matrix",
    "format_poly",
    "free_difference_quotient",
    "build_DF",
    "evaluate_bipoly",
    "evaluate_DF",
    "contract",
    "rank_defect_report",
    "law_of",
    "monomials",
    "moment_matrix",
    "parse_poly",
    "PolyParseError",
]

Letter = tuple[int, bool]
Word = tuple[Letter, ...]


# ---------------------------------------------------------------------------
# coefficients


def _coerce(c: Any) -> Any:
    if isinstance(c, Cyclotomic):
        return c
    if isinstance(c, (bool, int, Fraction)):
        return Cyclotomic.integer(c)
    if isinstance(c, (complex, float, np.number)):
        return complex(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _add(a: Any, b: Any) -> Any:
    if isinstance(a, Cyclotomic) and isinstance(b, Cyclotomic):
        return a + b
    return complex(a) + complex(b)


def _mul(a: Any, b: Any) -> Any:
    if isinstance(a, Cyclotomic) and isinstance(b, Cyclotomic):
        return a * b
    return complex(a) * complex(b)


def _is_zero(a: Any) -> bool:
    return (not a) if isinstance(a, Cyclotomic) else a == 0


def _conj(a: Any) -> Any:
    return a.conj() if isinstance(a, Cyclotomic) else complex(a).conjugate()


def _prune(terms: Mapping[Any, Any]) -> dict:
    return {k: v for k, v in terms.items() if not _is_zero(v)}


def _accumulate(into: dict, key: Any, c: Any) -> None:
    into[key] = _add(into[key], c) if key in into else c


# ---------------------------------------------------------------------------
# polynomials


class NcPoly:
    """Noncommutative polynomial in variables flagged self-adjoint or not."""

    __slots__ = ("self_adjoint", "terms", "_hash")

    def __init__(self, self_adjoint: Sequence[bool], terms: Mapping[Word, Any] | None = None) -> None:
        self.self_adjoint = tuple(bool(x) for x in self_adjoint)
        clean: dict[Word, Any] = {}
        for w, c in (terms or {}).items():
            w = self._normal_word(w)
            _accumulate(clean, w, _coerce(c))
        self.terms = _prune(clean)
        self._hash: int | None = None

    def _normal_word(self, w: Iterable[Letter]) -> Word:
        out = []
        for i, star in w:
            if not 0 <= i < len(self.self_adjoint):
                raise ValueError(f"variable index {i} out of range")
            out.append((int(i), bool(star) and not self.self_adjoint[i]))
        return tuple(out)

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, c: Any, self_adjoint: Sequence[bool]) -> NcPoly:
        return cls(self_adjoint, {(): c})

    @classmethod
    def monomial(cls, word: Iterable[Letter], self_adjoint: Sequence[bool], c: Any = 1) -> NcPoly:
        return cls(self_adjoint, {tuple(word): c})

    @property
    def nvars(self) -> int:
        return len(self.self_adjoint)

    def _same_space(self, other: NcPoly) -> None:
        if self.self_adjoint != other.self_adjoint:
            raise ValueError("polynomials live over different variable sets")

    def _lift(self, other: Any) -> NcPoly:
        if isinstance(other, NcPoly):
            self._same_space(other)
            return other
        return NcPoly.constant(other, self.self_adjoint)

    # arithmetic -----------------------------------------------------------------

    def __add__(self, other: Any) -> NcPoly:
        o = self._lift(other)
        t = dict(self.terms)
        for w, c in o.terms.items():
            _accumulate(t, w, c)
        return NcPoly(self.self_adjoint, t)

    __radd__ = __add__

    def __neg__(self) -> NcPoly:
        return NcPoly(self.self_adjoint, {w: _mul(Cyclotomic.integer(-1), c) for w, c in self.terms.items()})

    def __sub__(self, other: Any) -> NcPoly:
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> NcPoly:
        return self._lift(other) - self

    def __mul__(self, other: Any) -> NcPoly:
        if isinstance(other, NcBiPoly):
            return NotImplemented
        o = self._lift(other)
        t: dict[Word, Any] = {}
        for (w1, c1), (w2, c2) in itertools.product(self.terms.items(), o.terms.items()):
            _accumulate(t, w1 + w2, _mul(c1, c2))
        return NcPoly(self.self_adjoint, t)

    def __rmul__(self, other: Any) -> NcPoly:
        return self._lift(other) * self

    def __pow__(self, e: int) -> NcPoly:
        if e < 0:
            raise ValueError("negative powers are not supported")
        out = NcPoly.constant(1, self.self_adjoint)
        for _ in range(e):
            out = out * self
        return out

    def adjoint(self) -> NcPoly:
        t = {}
        for w, c in self.terms.items():
            _accumulate(t, tuple((i, not s) for i, s in reversed(w)), _conj(c))
        return NcPoly(self.self_adjoint, t)

    @property
    def star(self) -> NcPoly:
        return self.adjoint()

    # inspection -------------------------------------------------------------

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def is_exact(self) -> bool:
        return all(isinstance(c, Cyclotomic) for c in self.terms.values())

    def common_denominator(self) -> int:
        """Least positive integer clearing every rational coefficient denominator."""
        if not self.is_exact():
            raise ValueError("complex coefficients have no exact denominator")
        d = 1
        for c in self.terms.values():
            for a in c.coeffs:
                d = math.lcm(d, Fraction(a).denominator)
        return d

    def to_complex(self) -> NcPoly:
        return NcPoly(self.self_adjoint, {w: complex(c) for w, c in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, NcPoly):
            if self.self_adjoint != other.self_adjoint:
                return False
            return _prune((self - other).terms) == {}
        if isinstance(other, (int, Fraction, Cyclotomic, complex, float)):
            return self == NcPoly.constant(other, self.self_adjoint)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.self_adjoint, frozenset((w, c if isinstance(c, Cyclotomic) else complex(c)) for w, c in self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"NcPoly({format_poly(self)})"


def variables(r: int, self_adjoint: bool | Sequence[bool] = True) -> tuple[NcPoly, ...]:
    """The ``r`` coordinate polynomials."""
    flags = (self_adjoint,) * r if isinstance(self_adjoint, bool) else tuple(self_adjoint)
    if len(flags) != r:
        raise ValueError("one self-adjoint flag per variable required")
    return tuple(NcPoly.monomial([(i, False)], flags) for i in range(r))


def _format_coeff(c: Any) -> str:
    if isinstance(c, Cyclotomic):
        if c.m == 1 and isinstance(c.coeffs[0], int):
            return str(c.coeffs[0])
        return f"c({c.m}; {', '.join(str(a) for a in c.coeffs)})"
    return repr(complex(c))


def _format_word(w: Word) -> str:
    return " ".join(f"s{i + 1}{'*' if s else ''}" for i, s in w) or "1"


def format_poly(P: NcPoly) -> str:
    """Readable form; exact polynomials print in the syntax accepted by :func:`parse_poly`."""
    if not P.terms:
        return "0"
    out = ""
    for w in sorted(P.terms, key=lambda w: (len(w), w)):
        c = P.terms[w]
        cs = _format_coeff(c)
        sign = "+"
        if cs.startswith("-"):
            sign, cs = "-", cs[1:]
        if not w:
            body = cs
        elif cs == "1":
            body = _format_word(w)
        else:
            body = f"{cs} {_format_word(w)}"
        if not out:
            out = body if sign == "+" else f"-{body}"
        else:
            out += f" {sign} {body}"
    return out


# ---------------------------------------------------------------------------
# evaluation


def _word_values(words: Iterable[Word], X: Sequence[Any], exact: bool) -> dict[Word, Any]:
    """Matrix values of words, sharing prefix products."""
    n = X[0].shape[0]
    if exact:
        letters = {}
        for i, A in enumerate(X):
            letters[(i, False)] = A
            letters[(i, True)] = None
        one = CycMatrix.identity(n)
    else:
        letters = {(i, False): np.asarray(A) for i, A in enumerate(X)}
        one = np.eye(n, dtype=complex)
    cache: dict[Word, Any] = {(): one}
    for w in sorted(set(words), key=len):
        for k in range(len(w) + 1):
            if w[:k] in cache:
                continue
            prev = cache[w[: k - 1]]
            i, s = w[k - 1]
            L = letters.get((i, s))
            if L is None:
                L = X[i].adjoint() if exact else np.asarray(X[i]).conj().T
                letters[(i, s)] = L
            cache[w[:k]] = prev @ L
    return cache


def _check_arity(P: NcPoly, X: Sequence[Any]) -> None:
    if len(X) != P.nvars:
        raise ValueError(f"polynomial has {P.nvars} variables but {len(X)} matrices were given")
    shapes = {tuple(A.shape) for A in X}
    if len(shapes) != 1 or (s := shapes.pop())[0] != s[1]:
        raise ValueError("all matrices must be square of one size")


def evaluate(P: NcPoly, X: Sequence[Any]) -> Any:
    """``P(X)``.  Exact when every matrix is a :class:`CycMatrix` and coefficients are cyclotomic integers."""
    X = tuple(X)
    _check_arity(P, X)
    exact = all(isinstance(A, CycMatrix) for A in X) and P.is_exact()
    if exact and not all(c.is_integer() for c in P.terms.values()):
        raise ValueError("exact evaluation needs cyclotomic-integer coefficients; scale by common_denominator()")
    if not exact:
        X = tuple(A.to_complex() if isinstance(A, CycMatrix) else np.asarray(A) for A in X)
    vals = _word_values(P.terms, X, exact)
    n = X[0].shape[0]
    if exact:
        out = CycMatrix.zeros(n, n)
        for w, c in P.terms.items():
            out = out + vals[w].scale(c)
        return out
    out = np.zeros((n, n), dtype=complex)
    for w, c in P.terms.items():
        out += complex(c) * vals[w]
    return out


def evaluate_matrix(Ps: Sequence[Sequence[NcPoly]], X: Sequence[Any]) -> np.ndarray:
    """Block matrix ``(P_ij(X))`` for a matrix of polynomials (numeric)."""
    return np.block([[evaluate(P, X) if not isinstance(X[0], CycMatrix) else evaluate(P, X).to_complex() for P in row] for row in Ps])


# ---------------------------------------------------------------------------
# tensor square


class NcBiPoly:
    """Element of the algebraic tensor square, ``sum c (a (x) b)`` over word pairs."""

    __slots__ = ("self_adjoint", "terms")

    def __init__(self, self_adjoint: Sequence[bool], terms: Mapping[tuple[Word, Word], Any] | None = None) -> None:
        self.self_adjoint = tuple(self_adjoint)
        clean: dict = {}
        for k, c in (terms or {}).items():
            _accumulate(clean, (tuple(k[0]), tuple(k[1])), _coerce(c))
        self.terms = _prune(clean)

    @classmethod
    def tensor(cls, a: NcPoly, b: NcPoly) -> NcBiPoly:
        a._same_space(b)
        t: dict = {}
        for (w1, c1), (w2, c2) in itertools.product(a.terms.items(), b.terms.items()):
            _accumulate(t, (w1, w2), _mul(c1, c2))
        return cls(a.self_adjoint, t)

    @classmethod
    def one(cls, self_adjoint: Sequence[bool]) -> NcBiPoly:
        return cls(self_adjoint, {((), ()): 1})

    @classmethod
    def zero(cls, self_adjoint: Sequence[bool]) -> NcBiPoly:
        return cls(self_adjoint)

    def __add__(self, other: NcBiPoly) -> NcBiPoly:
        t = dict(self.terms)
        for k, c in other.terms.items():
            _accumulate(t, k, c)
        return NcBiPoly(self.self_adjoint, t)

    def __neg__(self) -> NcBiPoly:
        return NcBiPoly(self.self_adjoint, {k: _mul(Cyclotomic.integer(-1), c) for k, c in self.terms.items()})

    def __sub__(self, other: NcBiPoly) -> NcBiPoly:
        return self + (-other)

    def left_mul(self, u: NcPoly) -> NcBiPoly:
        """``u . (a (x) b) = ua (x) b``."""
        t: dict = {}
        for (wu, cu), ((a, b), c) in itertools.product(u.terms.items(), self.terms.items()):
            _accumulate(t, (wu + a, b), _mul(cu, c))
        return NcBiPoly(self.self_adjoint, t)

    def right_mul(self, v: NcPoly) -> NcBiPoly:
        """``(a (x) b) . v = a (x) bv``."""
        t: dict = {}
        for ((a, b), c), (wv, cv) in itertools.product(self.terms.items(), v.terms.items()):
            _accumulate(t, (a, b + wv), _mul(c, cv))
        return NcBiPoly(self.self_adjoint, t)

    def op_mul(self, other: NcBiPoly) -> NcBiPoly:
        """Product in ``A (x) A^op``: ``(a (x) b)(c (x) d) = ac (x) db``."""
        t: dict = {}
        for ((a, b), c1), ((c, d), c2) in itertools.product(self.terms.items(), other.terms.items()):
            _accumulate(t, (a + c, d + b), _mul(c1, c2))
        return NcBiPoly(self.self_adjoint, t)

    def __mul__(self, other: Any) -> NcBiPoly:
        if isinstance(other, NcBiPoly):
            return self.op_mul(other)
        if isinstance(other, NcPoly):
            return self.right_mul(other)
        c = _coerce(other)
        return NcBiPoly(self.self_adjoint, {k: _mul(v, c) for k, v in self.terms.items()})

    def __rmul__(self, other: Any) -> NcBiPoly:
        if isinstance(other, NcPoly):
            return self.left_mul(other)
        return self * other

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NcBiPoly):
            return NotImplemented
        return self.self_adjoint == other.self_adjoint and (self - other).terms == {}

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        if not self.terms:
            return "NcBiPoly(0)"
        parts = [f"{_format_coeff(c)}*({_format_word(a)} (x) {_format_word(b)})" for (a, b), c in sorted(self.terms.items(), key=lambda kv: (len(kv[0][0]) + len(kv[0][1]), kv[0]))]
        return "NcBiPoly(" + " + ".join(parts) + ")"


def free_difference_quotient(P: NcPoly, i: int) -> NcBiPoly:
    """``d_i P``: on a monomial, the sum over positions holding ``s_i`` of prefix (x) suffix."""
    if not all(P.self_adjoint):
        raise ValueError("free difference quotients are defined for self-adjoint variables")
    if not 0 <= i < P.nvars:
        raise ValueError(f"variable index {i} out of range")
    t: dict = {}
    for w, c in P.terms.items():
        for p, (j, _) in enumerate(w):
            if j == i:
                _accumulate(t, (w[:p], w[p + 1 :]), c)
    return NcBiPoly(P.self_adjoint, t)


def build_DF(F: Sequence[NcPoly], r: int) -> list[list[NcBiPoly]]:
    """Relation matrix with rows ``(S_j (x) 1 - 1 (x) S_j)_j`` and ``(d_j F_i)_j``."""
    if r < 1:
        raise ValueError("need at least one variable")
    flags = (True,) * r
    for P in F:
        if P.self_adjoint != flags:
            raise ValueError("relations must be polynomials in the r self-adjoint variables")
    S = variables(r)
    one = NcPoly.constant(1, flags)
    top = [NcBiPoly.tensor(S[j], one) - NcBiPoly.tensor(one, S[j]) for j in range(r)]
    return [top] + [[free_difference_quotient(P, j) for j in range(r)] for P in F]


def _as_numeric_tuple(X: Sequence[Any]) -> tuple[np.ndarray, ...]:
    return tuple(A.to_complex() if isinstance(A, CycMatrix) else np.asarray(A, dtype=complex) for A in X)


def evaluate_bipoly(Q: NcBiPoly, X: Sequence[Any]) -> np.ndarray:
    """``sum c kron(a(X), b(X).T)`` on the ``N**2``-dimensional space."""
    X = _as_numeric_tuple(X)
    if len(X) != len(Q.self_adjoint):
        raise ValueError(f"bipolynomial has {len(Q.self_adjoint)} variables but {len(X)} matrices were given")
    if len({A.shape for A in X}) != 1:
        raise ValueError("all matrices must be square of one size")
    n = X[0].shape[0]
    words = [a for a, _ in Q.terms] + [b for _, b in Q.terms]
    vals = _word_values(words, X, exact=False)
    out = np.zeros((n * n, n * n), dtype=complex)
    for (a, b), c in Q.terms.items():
        out += complex(c) * np.kron(vals[a], vals[b].T)
    return out


def evaluate_DF(DF: Sequence[Sequence[NcBiPoly]], X: Sequence[Any]) -> np.ndarray:
    """Blockwise evaluation of a matrix of bipolynomials."""
    return np.block([[evaluate_bipoly(Q, X) for Q in row] for row in DF])


def contract(Q: NcBiPoly, X: Sequence[Any], E: np.ndarray) -> np.ndarray:
    """``sum c a(X) E b(X)``, the directional derivative pairing for ``d_i P``."""
    X = _as_numeric_tuple(X)
    vals = _word_values([a for a, _ in Q.terms] + [b for _, b in Q.terms], X, exact=False)
    out = np.zeros_like(np.asarray(E, dtype=complex))
    for (a, b), c in Q.terms.items():
        out += complex(c) * (vals[a] @ E @ vals[b])
    return out


@dataclass(frozen=True)
class RankDefectReport:
    kernel_fraction: float
    kernel_dim: int
    rank: int
    det_plus: float
    smallest_nonzero: float | None
    largest_dropped: float | None
    threshold: float


def rank_defect_report(DFX: np.ndarray, N: int, rtol: float | None = None) -> RankDefectReport:
    """Kernel dimension of ``DFX`` as a map on its column space, divided by ``N**2``."""
    rep = det_plus_report(DFX, rtol)
    kdim = DFX.shape[1] - rep.rank
    return RankDefectReport(kdim / N**2, kdim, rep.rank, rep.value, rep.smallest_kept, rep.largest_dropped, rep.threshold)


# ---------------------------------------------------------------------------
# laws


def monomials(self_adjoint: Sequence[bool], max_degree: int) -> list[Word]:
    """All words of length at most ``max_degree`` in shortlex order."""
    letters = []
    for i, sa in enumerate(self_adjoint):
        letters.append((i, False))
        if not sa:
            letters.append((i, True))
    out: list[Word] = []
    for d in range(max_degree + 1):
        out.extend(itertools.product(letters, repeat=d))
    return out


@dataclass(frozen=True)
class Law:
    self_adjoint: tuple[bool, ...]
    degree_cap: int
    moments: dict

    def __call__(self, P: NcPoly | Word) -> Any:
        if isinstance(P, NcPoly):
            if P.degree() > self.degree_cap:
                raise ValueError("polynomial degree exceeds the law's degree cap")
            acc: Any = Cyclotomic.integer(0) if self.is_exact() and P.is_exact() else 0j
            for w, c in P.terms.items():
                acc = _add(acc, _mul(c, self.moments[w]))
            return acc
        return self.moments[tuple(P)]

    def is_exact(self) -> bool:
        return all(isinstance(v, Cyclotomic) for v in self.moments.values())


def law_of(X: Sequence[Any], degree_cap: int = 6, self_adjoint: bool | Sequence[bool] = False) -> Law:
    """Normalised-trace moments of ``X`` up to ``degree_cap``; exact for cyclotomic matrices."""
    X = tuple(X)
    flags = (self_adjoint,) * len(X) if isinstance(self_adjoint, bool) else tuple(self_adjoint)
    exact = all(isinstance(A, CycMatrix) for A in X)
    if not exact:
        X = _as_numeric_tuple(X)
    words = monomials(flags, degree_cap)
    vals = _word_values(words, X, exact)
    n = X[0].shape[0]
    if exact:
        mom = {w: vals[w].trace() * Fraction(1, n) for w in words}
    else:
        mom = {w: complex(np.trace(vals[w])) / n for w in words}
    return Law(flags, degree_cap, mom)


def moment_matrix(law: Law, degree: int | None = None) -> np.ndarray:
    """``[tau(u^* v)]`` over words ``u, v`` of length at most ``degree // 2``."""
    half = (law.degree_cap if degree is None else degree) // 2
    if 2 * half > law.degree_cap:
        raise ValueError("degree exceeds the law's degree cap")
    ws = monomials(law.self_adjoint, half)
    H = np.empty((len(ws), len(ws)), dtype=complex)
    for a, u in enumerate(ws):
        ustar = tuple((i, (not s) and not law.self_adjoint[i]) for i, s in reversed(u))
        for b, v in enumerate(ws):
            H[a, b] = complex(law.moments[ustar + v])
    return H


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(?P<var>s(?P<vi>\d+))|(?P<cyc>c\(\s*(?P<cm>\d+)\s*;(?P<ca>[^)]*)\))|(?P<int>\d+)|(?P<op>[-+*^()]))")


class PolyParseError(ValueError):
    def __init__(self, text: str, pos: int, msg: str) -> None:
        super().__init__(f"{msg} at column {pos + 1}: {text!r}")
        self.pos = pos


def _tokenize(text: str) -> list[tuple[str, Any, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolyParseError(text, len(text) - len(text[pos:].lstrip()), "unexpected character")
        start = m.start(m.lastgroup) if m.lastgroup else pos
        if m.group("var"):
            toks.append(("var", int(m.group("vi")), start))
        elif m.group("cyc"):
            try:
                coeffs = [Fraction(a.strip()) for a in m.group("ca").split(",")]
            except ValueError:
                raise PolyParseError(text, start, "cyclotomic coefficients must be rationals") from None
            toks.append(("num", Cyclotomic(int(m.group("cm")), coeffs), start))
        elif m.group("int"):
            toks.append(("num", Cyclotomic.integer(int(m.group("int"))), start))
        else:
            toks.append(("op", m.group("op"), start))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


def parse_poly(text: str, r: int | None = None, self_adjoint: bool | Sequence[bool] = True) -> NcPoly:
    """Parse a polynomial such as ``"s1 s2* - 2 s1^2 + c(3; 0,1) s2"``.

    Variables are ``s1 .. sr``; juxtaposition multiplies, postfix ``*`` takes
    adjoints, ``^k`` raises to a power and ``c(m; a0, a1, ...)`` denotes
    ``sum a_t zeta_m**t`` with rational ``a_t``.
    """
    toks = _tokenize(text)
    if r is None:
        r = max([v for k, v, _ in toks if k == "var"], default=1)
    flags = (self_adjoint,) * r if isinstance(self_adjoint, bool) else tuple(self_adjoint)
    if len(flags) != r:
        raise ValueError("one self-adjoint flag per variable required")
    k = 0

    def peek() -> tuple[str, Any, int]:
        return toks[k]

    def take() -> tuple[str, Any, int]:
        nonlocal k
        k += 1
        return toks[k - 1]

    def expr() -> NcPoly:
        sign = 1
        if peek()[:2] in (("op", "-"), ("op", "+")):
            sign = -1 if take()[1] == "-" else 1
        acc = term() * sign
        while peek()[:2] in (("op", "-"), ("op", "+")):
            op = take()[1]
            t = term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term() -> NcPoly:
        acc = factor()
        while peek()[0] in ("var", "num") or peek()[:2] == ("op", "("):
            acc = acc * factor()
        return acc

    def factor() -> NcPoly:
        kind, val, pos = take()
        if kind == "var":
            if not 1 <= val <= r:
                raise PolyParseError(text, pos, f"variable s{val} outside s1..s{r}")
            base = NcPoly.monomial([(val - 1, False)], flags)
        elif kind == "num":
            base = NcPoly.constant(val, flags)
        elif (kind, val) == ("op", "("):
            base = expr()
            if take()[:2] != ("op", ")"):
                raise PolyParseError(text, pos, "unbalanced parenthesis")
        else:
            raise PolyParseError(text, pos, "expected a variable, number or '('")
        while peek()[:2] in (("op", "*"), ("op", "^")):
            _, op, p = take()
            if op == "*":
                base = base.adjoint()
            else:
                kind, e, p2 = take()
                if kind != "num" or e.m != 1:
                    raise PolyParseError(text, p2, "exponent must be a non-negative integer")
                base = base ** int(e.coeffs[0])
        return base

    out = expr()
    if peek()[0] != "end":
        raise PolyParseError(text, peek()[2], "trailing input")
    return out
