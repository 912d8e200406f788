"""Exact arithmetic over cyclotomic fields and Fuglede-Kadison pseudo-determinants.

Elements of ``Q(zeta_m)`` are coefficient vectors in the power basis
``1, zeta_m, ..., zeta_m**(phi(m)-1)`` reduced modulo the ``m``-th cyclotomic
polynomial.  Galois automorphisms act by ``zeta_m -> zeta_m**k`` for ``k``
coprime to ``m``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import ResourceCapError

__all__ = [
    "MAX_CONDUCTOR",
    "Cyclotomic",
    "CycMatrix",
    "GaloisOrbit",
    "DetPlusReport",
    "CertificateRow",
    "CertificateTable",
    "DirectSum",
    "euler_phi",
    "cyclotomic_polynomial",
    "zeta",
    "galois_orbit",
    "operator_norm_upper",
    "det_plus",
    "det_plus_report",
    "lemma31_bound",
    "check_determinant_bound",
    "liminf_certificate",
    "crossed_product_microstate",
    "crossed_product_generators",
    "crossed_product_index",
    "direct_sum_microstates",
    "tensor_microstates",
    "diag_constancy",
    "random_cyc_matrix",
]

MAX_CONDUCTOR = 360


# ---------------------------------------------------------------------------
# cyclotomic polynomials and reduction tables


@lru_cache(maxsize=None)
def euler_phi(m: int) -> int:
    return sum(1 for k in range(1, m + 1) if math.gcd(k, m) == 1)


def _divisors(m: int) -> list[int]:
    return [d for d in range(1, m + 1) if m % d == 0]


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Integer coefficients of the ``m``-th cyclotomic polynomial, lowest degree first."""
    num = [-1] + [0] * (m - 1) + [1]
    for d in _divisors(m):
        if d == m:
            continue
        den = cyclotomic_polynomial(d)
        # exact division by a monic polynomial
        out = [0] * (len(num) - len(den) + 1)
        rem = list(num)
        for i in range(len(out) - 1, -1, -1):
            q = rem[i + len(den) - 1]
            out[i] = q
            for j, a in enumerate(den):
                rem[i + j] -= q * a
        num = out
    return tuple(num)


@lru_cache(maxsize=None)
def _reduction_table(m: int) -> np.ndarray:
    """Row ``t`` holds the coefficients of ``x**t mod Phi_m`` for ``0 <= t < 2m``."""
    phi = euler_phi(m)
    poly = cyclotomic_polynomial(m)
    rows = np.zeros((2 * m, phi), dtype=object)
    cur = [0] * phi
    cur[0] = 1
    for t in range(2 * m):
        rows[t] = cur
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [a - top * b for a, b in zip(cur, poly[:phi])]
    return rows


def _check_conductor(m: int) -> None:
    if m < 1:
        raise ValueError("conductor must be positive")
    if m > MAX_CONDUCTOR:
        raise ResourceCapError(f"conductor {m} exceeds the maximum {MAX_CONDUCTOR}")


def _embed(vec: Sequence[Any], m: int, L: int) -> list[Any]:
    """Coefficients of an element of ``Q(zeta_m)`` in the power basis of ``Q(zeta_L)``."""
    if m == L:
        return list(vec)
    R = _reduction_table(L)
    step = L // m
    out = [0] * euler_phi(L)
    for t, a in enumerate(vec):
        if a:
            row = R[(t * step) % L]
            out = [x + a * y for x, y in zip(out, row)]
    return out


def _solve_exact(B: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve the (possibly overdetermined) system ``B y = rhs`` exactly or return None."""
    rows, cols = len(B), len(B[0]) if B else 0
    aug = [list(map(Fraction, B[i])) + [Fraction(rhs[i])] for i in range(rows)]
    piv_cols = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    if any(aug[i][cols] != 0 for i in range(r, rows)):
        return None
    y = [Fraction(0)] * cols
    for i, c in enumerate(piv_cols):
        y[c] = aug[i][cols]
    return y


def _field_divisors(m: int) -> list[int]:
    # Q(zeta_d) = Q(zeta_{d/2}) when d = 2 mod 4, so those never give a smaller field
    return [d for d in _divisors(m) if d % 4 != 2 or d == m]


@lru_cache(maxsize=4096)
def _minimize(m: int, vec: tuple) -> tuple[int, tuple]:
    """Smallest conductor ``d | m`` whose field contains the element, and its coefficients."""
    if all(a == 0 for a in vec):
        return 1, (0,)
    for d in _field_divisors(m):
        if d == m:
            break
        R = _reduction_table(m)
        step = m // d
        phi_d = euler_phi(d)
        B = [[R[(step * j) % m][i] for j in range(phi_d)] for i in range(len(vec))]
        y = _solve_exact(B, list(vec))
        if y is not None:
            return d, tuple(int(a) if a.denominator == 1 else a for a in y)
    return m, vec


def _norm_coeff(a: Any) -> Any:
    if isinstance(a, Fraction) and a.denominator == 1:
        return int(a)
    return a


class Cyclotomic:
    """Exact element of a cyclotomic field, stored at its smallest conductor."""

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs: Sequence[Any], *, reduced: bool = False) -> None:
        _check_conductor(m)
        phi = euler_phi(m)
        vec = [_norm_coeff(Fraction(a)) for a in coeffs]
        if len(vec) != phi:
            # interpret as powers of zeta_m and reduce
            R = _reduction_table(m)
            out = [0] * phi
            for t, a in enumerate(vec):
                if a:
                    out = [x + a * y for x, y in zip(out, R[t % m])]
            vec = out
        if not reduced:
            m, tup = _minimize(m, tuple(vec))
            vec = list(tup)
        self.m = m
        self.coeffs = tuple(_norm_coeff(Fraction(a)) for a in vec)

    @classmethod
    def integer(cls, n: int | Fraction) -> Cyclotomic:
        return cls(1, [n], reduced=True)

    @staticmethod
    def coerce(x: Any) -> Cyclotomic:
        if isinstance(x, Cyclotomic):
            return x
        if isinstance(x, (int, Fraction)):
            return Cyclotomic.integer(x)
        raise TypeError(f"cannot use {type(x).__name__} as a cyclotomic number")

    def is_integer(self) -> bool:
        """True when the element is an algebraic integer (power-basis coefficients integral)."""
        return all(isinstance(a, int) for a in self.coeffs)

    def _pair(self, other: Any) -> tuple[int, list, list]:
        o = Cyclotomic.coerce(other)
        L = math.lcm(self.m, o.m)
        _check_conductor(L)
        return L, _embed(self.coeffs, self.m, L), _embed(o.coeffs, o.m, L)

    def __add__(self, other: Any) -> Cyclotomic:
        try:
            L, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return Cyclotomic(L, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self) -> Cyclotomic:
        return Cyclotomic(self.m, [-a for a in self.coeffs], reduced=True)

    def __sub__(self, other: Any) -> Cyclotomic:
        return self + (-Cyclotomic.coerce(other))

    def __rsub__(self, other: Any) -> Cyclotomic:
        return Cyclotomic.coerce(other) - self

    def __mul__(self, other: Any) -> Cyclotomic:
        try:
            L, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        prod = [0] * (2 * len(a) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        R = _reduction_table(L)
        out = [0] * len(a)
        for t, x in enumerate(prod):
            if x:
                out = [u + x * v for u, v in zip(out, R[t])]
        return Cyclotomic(L, out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> Cyclotomic:
        if e < 0:
            raise ValueError("negative powers are not supported")
        out = Cyclotomic.integer(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def galois(self, k: int) -> Cyclotomic:
        """Image under ``zeta_m -> zeta_m**k`` (``k`` coprime to the conductor)."""
        if math.gcd(k, self.m) != 1:
            raise ValueError(f"{k} is not a unit modulo {self.m}")
        R = _reduction_table(self.m)
        out = [0] * len(self.coeffs)
        for t, a in enumerate(self.coeffs):
            if a:
                out = [u + a * v for u, v in zip(out, R[(k * t) % self.m])]
        return Cyclotomic(self.m, out, reduced=True)

    def conj(self) -> Cyclotomic:
        return self.galois(-1 % self.m if self.m > 1 else 1)

    def to_complex(self, k: int = 1) -> complex:
        w = np.exp(2j * np.pi * k * np.arange(len(self.coeffs)) / self.m)
        return complex(np.dot(np.array([float(a) for a in self.coeffs]), w))

    def __complex__(self) -> complex:
        return self.to_complex()

    def __eq__(self, other: object) -> bool:
        try:
            o = Cyclotomic.coerce(other)
        except TypeError:
            return NotImplemented
        return self.m == o.m and self.coeffs == o.coeffs

    def __hash__(self) -> int:
        return hash((self.m, self.coeffs))

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __repr__(self) -> str:
        if self.m == 1:
            return f"Cyclotomic({self.coeffs[0]})"
        return f"Cyclotomic(m={self.m}, {list(self.coeffs)})"


def zeta(m: int, k: int = 1) -> Cyclotomic:
    """``exp(2 pi i k / m)``."""
    _check_conductor(m)
    vec = [0] * m
    vec[k % m] = 1
    return Cyclotomic(m, vec)


# ---------------------------------------------------------------------------
# matrices


class CycMatrix:
    """Matrix over ``Z[zeta_m]``: integer array of shape ``(rows, cols, phi(m))``."""

    __slots__ = ("m", "data")

    def __init__(self, m: int, data: np.ndarray) -> None:
        _check_conductor(m)
        data = np.asarray(data, dtype=object)
        if data.ndim != 3 or data.shape[2] != euler_phi(m):
            raise ValueError(f"data must have shape (rows, cols, {euler_phi(m)})")
        for a in data.flat:
            if not isinstance(a, (int, np.integer)):
                raise ValueError("entries must be cyclotomic integers")
        self.m = m
        self.data = np.vectorize(int, otypes=[object])(data) if data.size else data

    # construction -------------------------------------------------------

    @classmethod
    def from_ints(cls, a: Any) -> CycMatrix:
        arr = np.array(a, dtype=object)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d integer array")
        return cls(1, arr[:, :, None])

    @classmethod
    def identity(cls, n: int, m: int = 1) -> CycMatrix:
        d = np.zeros((n, n, euler_phi(m)), dtype=object)
        for i in range(n):
            d[i, i, 0] = 1
        return cls(m, d)

    @classmethod
    def zeros(cls, rows: int, cols: int, m: int = 1) -> CycMatrix:
        return cls(m, np.zeros((rows, cols, euler_phi(m)), dtype=object))

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[Any]]) -> CycMatrix:
        """From nested lists of integers or integral :class:`Cyclotomic` values."""
        ents = [[Cyclotomic.coerce(x) for x in row] for row in rows]
        L = 1
        for row in ents:
            for x in row:
                if not x.is_integer():
                    raise ValueError("entries must be cyclotomic integers")
                L = math.lcm(L, x.m)
        _check_conductor(L)
        r, c = len(ents), len(ents[0]) if ents else 0
        d = np.zeros((r, c, euler_phi(L)), dtype=object)
        for i, row in enumerate(ents):
            for j, x in enumerate(row):
                d[i, j] = _embed(x.coeffs, x.m, L)
        return cls(L, d)

    @classmethod
    def from_powers(cls, m: int, exps: np.ndarray, mask: np.ndarray | None = None) -> CycMatrix:
        """Matrix with entries ``zeta_m**exps`` where ``mask`` is true and 0 elsewhere."""
        exps = np.asarray(exps)
        mask = np.ones(exps.shape, dtype=bool) if mask is None else np.asarray(mask)
        R = _reduction_table(m)
        d = np.zeros(exps.shape + (euler_phi(m),), dtype=object)
        for idx in zip(*np.nonzero(mask)):
            d[idx] = R[int(exps[idx]) % m]
        return cls(m, d)

    @classmethod
    def from_document(cls, doc: dict) -> CycMatrix:
        """``{"conductor": m, "entries": [[[a0, a1, ...], ...], ...]}`` (powers of zeta_m)."""
        m = int(doc["conductor"])
        _check_conductor(m)
        R = _reduction_table(m)
        rows = doc["entries"]
        phi = euler_phi(m)
        d = np.zeros((len(rows), len(rows[0]) if rows else 0, phi), dtype=object)
        for i, row in enumerate(rows):
            for j, coeffs in enumerate(row):
                coeffs = [coeffs] if isinstance(coeffs, int) else coeffs
                acc = [0] * phi
                for t, a in enumerate(coeffs):
                    if not isinstance(a, int):
                        raise ValueError(f"entries[{i}][{j}] must list integers")
                    if a:
                        acc = [u + a * v for u, v in zip(acc, R[t % m])]
                d[i, j] = acc
        return cls(m, d)

    def to_document(self) -> dict:
        return {"conductor": self.m, "entries": [[list(map(int, self.data[i, j])) for j in range(self.cols)] for i in range(self.rows)]}

    # basic properties -----------------------------------------------------

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    def entry(self, i: int, j: int) -> Cyclotomic:
        return Cyclotomic(self.m, list(self.data[i, j]))

    def is_zero(self) -> bool:
        return not any(self.data.flat)

    def promote(self, L: int) -> CycMatrix:
        if L % self.m:
            raise ValueError(f"{L} is not a multiple of the conductor {self.m}")
        if L == self.m:
            return self
        _check_conductor(L)
        M = np.array([_embed([1 if s == t else 0 for s in range(euler_phi(self.m))], self.m, L) for t in range(euler_phi(self.m))], dtype=object)
        return CycMatrix(L, self.data.dot(M) if self.data.size else np.zeros(self.shape + (euler_phi(L),), dtype=object))

    def normalized(self) -> CycMatrix:
        """Same matrix at the least conductor containing every entry."""
        if self.m == 1 or self.is_zero():
            return self if self.m == 1 else CycMatrix.zeros(self.rows, self.cols)
        for d in _field_divisors(self.m):
            if d == self.m:
                break
            ok = True
            phi_d = euler_phi(d)
            out = np.zeros(self.shape + (phi_d,), dtype=object)
            for i, j in itertools.product(range(self.rows), range(self.cols)):
                dm, vec = _minimize(self.m, tuple(self.data[i, j]))
                if d % dm:
                    ok = False
                    break
                out[i, j] = _embed(vec, dm, d)
            if ok:
                return CycMatrix(d, out)
        return self

    def _common(self, other: CycMatrix) -> tuple[CycMatrix, CycMatrix]:
        L = math.lcm(self.m, other.m)
        _check_conductor(L)
        return self.promote(L), other.promote(L)

    # ring operations ------------------------------------------------------

    def __add__(self, other: CycMatrix) -> CycMatrix:
        a, b = self._common(other)
        if a.shape != b.shape:
            raise ValueError("shape mismatch")
        return CycMatrix(a.m, a.data + b.data)

    def __neg__(self) -> CycMatrix:
        return CycMatrix(self.m, -self.data)

    def __sub__(self, other: CycMatrix) -> CycMatrix:
        return self + (-other)

    def __matmul__(self, other: CycMatrix) -> CycMatrix:
        a, b = self._common(other)
        if a.cols != b.rows:
            raise ValueError("shape mismatch")
        phi = euler_phi(a.m)
        full = np.zeros((a.rows, b.cols, 2 * phi - 1), dtype=object)
        for s in range(phi):
            As = a.data[:, :, s]
            if not As.any():
                continue
            for t in range(phi):
                Bt = b.data[:, :, t]
                if Bt.any():
                    full[:, :, s + t] += As.dot(Bt)
        R = _reduction_table(a.m)[: 2 * phi - 1]
        return CycMatrix(a.m, full.dot(R))

    def scale(self, x: Any) -> CycMatrix:
        x = Cyclotomic.coerce(x)
        if not x.is_integer():
            raise ValueError("scalar must be a cyclotomic integer")
        return CycMatrix.from_entries([[x]]).kron_scalar(self)

    def kron_scalar(self, other: CycMatrix) -> CycMatrix:
        # self is 1x1
        return self.kron(other)

    def kron(self, other: CycMatrix) -> CycMatrix:
        a, b = self._common(other)
        phi = euler_phi(a.m)
        full = np.zeros((a.rows, b.rows, a.cols, b.cols, 2 * phi - 1), dtype=object)
        for s in range(phi):
            for t in range(phi):
                full[..., s + t] += np.einsum("ij,kl->ikjl", a.data[:, :, s], b.data[:, :, t])
        R = _reduction_table(a.m)[: 2 * phi - 1]
        return CycMatrix(a.m, full.reshape(a.rows * b.rows, a.cols * b.cols, 2 * phi - 1).dot(R))

    def galois(self, k: int) -> CycMatrix:
        if math.gcd(k, self.m) != 1:
            raise ValueError(f"{k} is not a unit modulo {self.m}")
        R = _reduction_table(self.m)
        G = np.array([R[(k * t) % self.m] for t in range(euler_phi(self.m))], dtype=object)
        return CycMatrix(self.m, self.data.dot(G))

    def conj(self) -> CycMatrix:
        return self.galois(-1 % self.m) if self.m > 1 else self

    def adjoint(self) -> CycMatrix:
        c = self.conj()
        return CycMatrix(c.m, c.data.transpose(1, 0, 2))

    def transpose(self) -> CycMatrix:
        return CycMatrix(self.m, self.data.transpose(1, 0, 2))

    def power(self, e: int) -> CycMatrix:
        out = CycMatrix.identity(self.rows, self.m)
        for _ in range(e):
            out = out @ self
        return out

    def diagonal(self) -> list[Cyclotomic]:
        return [self.entry(i, i) for i in range(min(self.shape))]

    def trace(self) -> Cyclotomic:
        acc = [sum(self.data[i, i, t] for i in range(min(self.shape))) for t in range(euler_phi(self.m))]
        return Cyclotomic(self.m, acc)

    def to_complex(self, k: int = 1) -> np.ndarray:
        """Numeric matrix under the embedding ``zeta_m -> exp(2 pi i k / m)``."""
        w = np.exp(2j * np.pi * k * np.arange(euler_phi(self.m)) / self.m)
        return self.data.astype(np.float64) @ w if self.data.size else np.zeros(self.shape, dtype=complex)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CycMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        a, b = self._common(other)
        return bool(np.all(a.data == b.data))

    def __hash__(self) -> int:
        n = self.normalized()
        return hash((n.m, n.shape, tuple(n.data.flat)))

    def key(self) -> tuple:
        n = self.normalized()
        return (n.m, n.shape, tuple(n.data.flat))

    def __repr__(self) -> str:
        return f"CycMatrix(m={self.m}, shape={self.shape})"


def block_diag(mats: Sequence[CycMatrix]) -> CycMatrix:
    L = 1
    for a in mats:
        L = math.lcm(L, a.m)
    _check_conductor(L)
    mats = [a.promote(L) for a in mats]
    r = sum(a.rows for a in mats)
    c = sum(a.cols for a in mats)
    d = np.zeros((r, c, euler_phi(L)), dtype=object)
    i = j = 0
    for a in mats:
        d[i : i + a.rows, j : j + a.cols] = a.data
        i += a.rows
        j += a.cols
    return CycMatrix(L, d)


def random_cyc_matrix(rng: np.random.Generator, n: int, m: int, bound: int = 2, cols: int | None = None) -> CycMatrix:
    """Random matrix with power-basis coefficients uniform in ``[-bound, bound]``."""
    cols = n if cols is None else cols
    d = rng.integers(-bound, bound + 1, size=(n, cols, euler_phi(m)))
    return CycMatrix(m, d.astype(object))


# ---------------------------------------------------------------------------
# Galois orbits, norms and pseudo-determinants


def operator_norm_upper(X: np.ndarray) -> float:
    """Largest singular value, inflated to an upper estimate of the exact norm."""
    X = np.asarray(X)
    if X.size == 0:
        return 0.0
    s = float(np.linalg.norm(X, 2))
    return s * (1.0 + 16.0 * max(X.shape) * np.finfo(float).eps)


def power_iteration_norm(X: np.ndarray, tol: float = 1e-10, max_iter: int = 10000, seed: int = 0) -> float:
    """Operator norm by power iteration on ``X^* X`` (a lower estimate)."""
    X = np.asarray(X, dtype=complex)
    if X.size == 0 or not X.any():
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.normal(size=X.shape[1]) + 1j * rng.normal(size=X.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = X.conj().T @ (X @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        if abs(nw - lam) <= tol * nw:
            lam = nw
            break
        lam = nw
    return float(np.sqrt(lam))


@dataclass(frozen=True)
class GaloisOrbit:
    base: CycMatrix
    units: tuple[int, ...]
    conjugates: tuple[CycMatrix, ...]
    orbit_size: int
    norm_bound: float

    @property
    def d(self) -> int:
        return self.orbit_size

    @property
    def C(self) -> float:
        return self.norm_bound


def galois_orbit(A: CycMatrix) -> GaloisOrbit:
    """All conjugates of ``A``, the number of distinct ones and the largest operator norm."""
    A = A.normalized()
    units = tuple(k for k in range(1, max(A.m, 1) + 1) if math.gcd(k, A.m) == 1 and k <= A.m)
    if A.m == 1:
        units = (1,)
    conj = tuple(A.galois(k) for k in units)
    distinct = {c.data.tobytes() if False else tuple(c.data.flat) for c in conj}
    C = max(operator_norm_upper(A.to_complex(k)) for k in units)
    return GaloisOrbit(A, units, conj, len(distinct), C)


@dataclass(frozen=True)
class DetPlusReport:
    value: float
    log_value: float
    rank: int
    threshold: float
    smallest_kept: float | None
    largest_dropped: float | None
    singular_values: tuple[float, ...] = field(repr=False)


def _as_numeric(A: Any) -> np.ndarray:
    if isinstance(A, CycMatrix):
        return A.to_complex()
    return np.asarray(A)


def det_plus_report(A: Any, rtol: float | None = None) -> DetPlusReport:
    """Product of the nonzero singular values of ``A``.

    Singular values at most ``max(rows, cols) * eps * s_max`` (or ``rtol * s_max``)
    count as zero.  The zero matrix has pseudo-determinant 1.
    """
    X = _as_numeric(A)
    if X.size == 0:
        return DetPlusReport(1.0, 0.0, 0, 0.0, None, None, ())
    s = np.linalg.svd(X, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    tol = (rtol if rtol is not None else max(X.shape) * np.finfo(float).eps) * smax
    kept = s[s > tol]
    dropped = s[s <= tol]
    logv = float(np.sum(np.log(kept))) if kept.size else 0.0
    return DetPlusReport(
        float(np.exp(logv)),
        logv,
        int(kept.size),
        float(tol),
        float(kept[-1]) if kept.size else None,
        float(dropped[0]) if dropped.size else None,
        tuple(float(x) for x in s),
    )


def det_plus(A: Any, rtol: float | None = None) -> float:
    return det_plus_report(A, rtol).value


def lemma31_bound(orbit: GaloisOrbit) -> float:
    """``C**(1 - d**2)``; 1 for the zero matrix."""
    if orbit.base.rows != orbit.base.cols:
        raise ValueError("the determinant bound needs a square matrix")
    if orbit.norm_bound == 0 or orbit.base.is_zero():
        return 1.0
    return float(orbit.norm_bound ** (1 - orbit.orbit_size**2))


def check_determinant_bound(A: CycMatrix, rtol: float | None = None) -> tuple[float, float, bool]:
    """``(det_plus(A)**(1/N), bound, holds)`` for a square cyclotomic-integer matrix."""
    orb = galois_orbit(A)
    bound = lemma31_bound(orb)
    lhs = det_plus(A, rtol) ** (1.0 / A.rows)
    return lhs, bound, lhs >= bound * (1 - 1e-9)


@dataclass(frozen=True)
class CertificateRow:
    k: int
    size: int
    det_plus_root: float
    C: float
    d: int
    bound: float
    degenerate: bool


@dataclass(frozen=True)
class CertificateTable:
    rows: tuple[CertificateRow, ...]
    uniform_C: float
    uniform_d: int
    uniform_bound: float
    scale: int

    @property
    def holds(self) -> bool:
        return all(r.det_plus_root >= self.uniform_bound * (1 - 1e-9) for r in self.rows)


def liminf_certificate(seq: Sequence[Sequence[CycMatrix]], P: Any, rtol: float | None = None) -> CertificateTable:
    """Pseudo-determinant of ``P`` at each microstate tuple against the uniform lower bound.

    ``P`` is an :class:`NcPoly` with cyclotomic coefficients; rational
    coefficients are cleared by an integer ``scale`` reported with the table.
    """
    from .freeprob import evaluate

    scale = P.common_denominator()
    Q = P * scale if scale != 1 else P
    rows = []
    for k, X in enumerate(seq, start=1):
        V = evaluate(Q, tuple(X))
        orb = galois_orbit(V)
        degenerate = V.is_zero()
        root = det_plus(V, rtol) ** (1.0 / V.rows)
        rows.append(CertificateRow(k, V.rows, root, orb.norm_bound, orb.orbit_size, lemma31_bound(orb), degenerate))
    C = max((r.C for r in rows if not r.degenerate), default=0.0)
    d = max((r.d for r in rows), default=1)
    uniform = 1.0 if C == 0 else float(C ** (1 - d * d))
    table = CertificateTable(tuple(rows), C, d, uniform, scale)
    if not table.holds:
        raise AssertionError("pseudo-determinant fell below the certified bound")
    return table


# ---------------------------------------------------------------------------
# microstates


def crossed_product_index(n: int, chi: int, g: int) -> int:
    return (chi % n) * n + (g % n)


def crossed_product_microstate(n: int) -> list[CycMatrix]:
    """Matrices of ``u_chi v_g`` (``chi, g`` in ``Z/n``) acting on the basis ``u_theta v_h``.

    ``u_chi v_g`` sends ``u_theta v_h`` to ``zeta_n**(-theta g) u_{chi+theta} v_{g+h}``,
    the left regular representation for ``v_g u_theta v_g^* = zeta_n**(-theta g) u_theta``.
    Basis vector ``(theta, h)`` has index ``theta * n + h``; the returned list is
    ordered by :func:`crossed_product_index`.
    """
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    idx = np.arange(n * n)
    theta, h = idx // n, idx % n
    for chi in range(n):
        for g in range(n):
            rows = ((chi + theta) % n) * n + (g + h) % n
            exps = np.zeros((n * n, n * n), dtype=np.int64)
            mask = np.zeros((n * n, n * n), dtype=bool)
            exps[rows, idx] = (-theta * g) % n
            mask[rows, idx] = True
            out.append(CycMatrix.from_powers(n, exps, mask) if n > 1 else CycMatrix.from_ints([[1]]))
    return out


def crossed_product_generators(n: int) -> tuple[CycMatrix, CycMatrix]:
    """The pair ``(u_1, v_1)`` generating the matrix algebra of size ``n**2``."""
    mats = crossed_product_microstate(n)
    return mats[crossed_product_index(n, 1, 0)], mats[crossed_product_index(n, 0, 1)]


@dataclass(frozen=True)
class DirectSum:
    matrices: tuple[CycMatrix, ...]
    projections: tuple[CycMatrix, ...]
    multiplicities: tuple[int, ...]
    weights: tuple[Fraction, ...]


def direct_sum_microstates(parts: Sequence[Sequence[CycMatrix]], target_weights: Sequence[Any], max_copies: int = 64) -> DirectSum:
    """Block-diagonal microstates whose blocks occupy the requested trace weights.

    Part ``j`` is repeated ``t_j`` times with ``t_j n_j`` proportional to the
    target weight.  Every generator of part ``j`` becomes
    ``0 + ... + X^{+t_j} + ... + 0``; the block projections are appended.
    """
    if len(parts) != len(target_weights) or not parts:
        raise ValueError("one weight per part required")
    w = [Fraction(x) for x in target_weights]
    if any(x <= 0 for x in w) or sum(w) != 1:
        raise ValueError("weights must be positive and sum to one")
    dims = []
    for p in parts:
        ds = {X.rows for X in p}
        if len(ds) != 1:
            raise ValueError("each part needs matrices of one size")
        dims.append(ds.pop())
    ratios = [x / n for x, n in zip(w, dims)]
    L = 1
    for r in ratios:
        L = math.lcm(L, r.denominator)
    t = [int(r * L) for r in ratios]
    g = math.gcd(*t)
    t = [x // g for x in t]
    if max(t) > max_copies:
        raise ValueError(f"multiplicities {t} exceed max_copies={max_copies}")
    sizes = [tj * nj for tj, nj in zip(t, dims)]
    total = sum(sizes)
    mats = []
    for j, p in enumerate(parts):
        for X in p:
            blocks = [CycMatrix.zeros(sz, sz) if i != j else block_diag([X] * t[j]) for i, sz in enumerate(sizes)]
            mats.append(block_diag(blocks))
    projs = [block_diag([CycMatrix.identity(sz) if i == j else CycMatrix.zeros(sz, sz) for i, sz in enumerate(sizes)]) for j in range(len(parts))]
    return DirectSum(tuple(mats), tuple(projs), tuple(t), tuple(Fraction(sz, total) for sz in sizes))


def tensor_microstates(a: Sequence[Any], b: Sequence[Any]) -> tuple[Any, ...]:
    """``(A_i (x) I, I (x) B_j)`` for cyclotomic or numeric matrices."""
    if not a or not b:
        raise ValueError("both tuples must be nonempty")
    na, nb = a[0].shape[0], b[0].shape[0]
    if isinstance(a[0], CycMatrix):
        Ib, Ia = CycMatrix.identity(nb), CycMatrix.identity(na)
        return tuple(X.kron(Ib) for X in a) + tuple(Ia.kron(Y) for Y in b)
    return tuple(np.kron(X, np.eye(nb)) for X in a) + tuple(np.kron(np.eye(na), Y) for Y in b)


def diag_constancy(X: Sequence[Any], poly_set: Sequence[Any]) -> dict[Any, float]:
    """``||Delta(P(X)) - tr(P(X)) I||_2`` (normalised) for each polynomial.

    Exact inputs whose diagonal is constant report exactly 0.
    """
    from .freeprob import evaluate

    out = {}
    for P in poly_set:
        V = evaluate(P, tuple(X))
        if isinstance(V, CycMatrix):
            diag = [tuple(V.data[i, i]) for i in range(V.rows)]
            if len(set(diag)) <= 1:
                out[P] = 0.0
                continue
            d = np.diag(V.to_complex())
        else:
            d = np.diag(np.asarray(V))
        out[P] = float(np.sqrt(np.mean(np.abs(d - d.mean()) ** 2)))
    return out
