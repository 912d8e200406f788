"""Mixed-radix index helpers for operators on tensor products of ``C^N`` legs.

Multi-indices over ``m`` legs are encoded with the first leg most
significant, which matches ``np.kron`` ordering.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np


def flat_index(digits: np.ndarray, N: int) -> np.ndarray:
    """Encode the last axis of ``digits`` (values in ``[0, N)``) as one integer."""
    digits = np.asarray(digits)
    m = digits.shape[-1]
    weights = N ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return digits @ weights


def digits_of(flat: np.ndarray, N: int, m: int) -> np.ndarray:
    """Inverse of :func:`flat_index`."""
    flat = np.asarray(flat, dtype=np.int64)
    out = np.empty(flat.shape + (m,), dtype=np.int64)
    rest = flat.copy()
    for pos in range(m - 1, -1, -1):
        out[..., pos] = rest % N
        rest //= N
    return out


def lift_matrix(X: np.ndarray, support: Sequence[int], m: int, N: int) -> np.ndarray:
    """Place ``X`` (acting on legs ``support``, in increasing order) inside ``m`` legs.

    The result is ``X`` tensored with identities on the remaining legs.
    """
    support = list(support)
    k = len(support)
    if sorted(support) != support or len(set(support)) != k:
        raise ValueError("support positions must be strictly increasing")
    if X.shape != (N**k, N**k):
        raise ValueError(f"operator of shape {X.shape} does not act on {k} legs of size {N}")
    if k == m:
        return X
    rest = [p for p in range(m) if p not in support]
    full = np.kron(X, np.eye(N ** (m - k), dtype=X.dtype))
    order = support + rest
    inv = np.argsort(order)
    t = full.reshape((N,) * (2 * m))
    t = t.transpose(list(inv) + [m + p for p in inv])
    return t.reshape(N**m, N**m)


def lift_diagonal(d: np.ndarray, support: Sequence[int], m: int, N: int) -> np.ndarray:
    """Diagonal analogue of :func:`lift_matrix` for a vector of diagonal entries."""
    support = list(support)
    k = len(support)
    if d.shape != (N**k,):
        raise ValueError("diagonal has the wrong length")
    if k == m:
        return d
    rest = [p for p in range(m) if p not in support]
    full = np.kron(d, np.ones(N ** (m - k), dtype=d.dtype))
    inv = np.argsort(support + rest)
    return full.reshape((N,) * m).transpose(list(inv)).reshape(-1)


def permutation_matrix(sigma: np.ndarray) -> np.ndarray:
    """Matrix ``S`` with ``S[sigma[i], i] = 1``."""
    n = len(sigma)
    S = np.zeros((n, n))
    S[sigma, np.arange(n)] = 1.0
    return S


def conjugate_by(X: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """``S^T X S`` for the permutation matrix of ``sigma``, without forming ``S``."""
    return X[np.ix_(sigma, sigma)]
