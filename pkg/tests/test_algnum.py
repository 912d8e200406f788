from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphprod.algnum import (
    CycMatrix,
    Cyclotomic,
    block_diag,
    check_determinant_bound,
    crossed_product_generators,
    crossed_product_index,
    crossed_product_microstate,
    cyclotomic_polynomial,
    det_plus,
    det_plus_report,
    diag_constancy,
    direct_sum_microstates,
    euler_phi,
    galois_orbit,
    lemma31_bound,
    liminf_certificate,
    operator_norm_upper,
    power_iteration_norm,
    random_cyc_matrix,
    tensor_microstates,
    zeta,
)
from graphprod.errors import ResourceCapError
from graphprod.freeprob import evaluate, monomials, parse_poly, variables

CONDUCTORS = [1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 15]


def numeric(m, powers, k=1):
    """Value of ``sum a_j zeta_m**(j k)`` straight from the definition."""
    return sum(a * cmath.exp(2j * math.pi * j * k / m) for j, a in enumerate(powers))


@st.composite
def elements(draw, m=None):
    m = draw(st.sampled_from(CONDUCTORS)) if m is None else m
    powers = draw(st.lists(st.integers(-3, 3), min_size=m, max_size=m))
    return m, powers


def test_spec_identities():
    assert zeta(3) + zeta(3, 2) == -1
    assert zeta(4) ** 2 == -1
    assert zeta(6) * zeta(6, 5) == 1
    assert (zeta(6) ** 2).m == 3
    assert (zeta(4) ** 2).m == 1 and (zeta(4) ** 2).is_integer()


@pytest.mark.parametrize("m, expected", [(1, (-1, 1)), (2, (1, 1)), (3, (1, 1, 1)), (4, (1, 0, 1)), (6, (1, -1, 1)), (12, (1, 0, -1, 0, 1))])
def test_cyclotomic_polynomials(m, expected):
    assert cyclotomic_polynomial(m) == expected
    assert len(expected) - 1 == euler_phi(m)


@given(elements(), elements())
@settings(max_examples=150, deadline=None)
def test_ring_operations_match_complex_values(x, y):
    (m1, p1), (m2, p2) = x, y
    a, b = Cyclotomic(m1, p1), Cyclotomic(m2, p2)
    va, vb = numeric(m1, p1), numeric(m2, p2)
    assert complex(a) == pytest.approx(va, abs=1e-9)
    assert complex(a + b) == pytest.approx(va + vb, abs=1e-9)
    assert complex(a * b) == pytest.approx(va * vb, abs=1e-8)
    assert complex(a - b) == pytest.approx(va - vb, abs=1e-9)
    assert complex(a.conj()) == pytest.approx(va.conjugate(), abs=1e-9)
    assert a - a == 0 and (a == b) == (abs(va - vb) < 1e-9)


@given(elements(12), elements(12), st.sampled_from([1, 5, 7, 11]))
@settings(max_examples=100, deadline=None)
def test_galois_action_is_a_ring_homomorphism(x, y, k):
    a, b = Cyclotomic(12, x[1]), Cyclotomic(12, y[1])
    assert (a * b).galois(k) == a.galois(k) * b.galois(k)
    assert (a + b).galois(k) == a.galois(k) + b.galois(k)
    assert complex(a.galois(k)) == pytest.approx(numeric(12, x[1], k), abs=1e-9)


def test_rational_coefficients_and_integrality():
    half = Cyclotomic(3, [Fraction(1, 2), Fraction(1, 2)])
    assert not half.is_integer()
    assert (half * 2).is_integer()
    assert Cyclotomic.integer(5) == 5


def test_conductor_cap():
    with pytest.raises(ResourceCapError):
        zeta(400)
    with pytest.raises(ResourceCapError):
        zeta(360) * zeta(7)


def cyc_to_numeric(A):
    return A.to_complex()


@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 4, 5, 6]))
@settings(max_examples=40, deadline=None)
def test_matrix_operations_commute_with_embedding(seed, m):
    rng = np.random.default_rng(seed)
    A, B = random_cyc_matrix(rng, 3, m), random_cyc_matrix(rng, 3, m)
    assert np.allclose((A @ B).to_complex(), A.to_complex() @ B.to_complex())
    assert np.allclose((A + B).to_complex(), A.to_complex() + B.to_complex())
    assert np.allclose(A.adjoint().to_complex(), A.to_complex().conj().T)
    assert np.allclose(A.kron(B).to_complex(), np.kron(A.to_complex(), B.to_complex()))
    assert complex(A.trace()) == pytest.approx(np.trace(A.to_complex()), abs=1e-9)
    units = [k for k in range(1, m) if math.gcd(k, m) == 1]
    for k in units:
        # the Galois group is abelian, so every sigma commutes with the adjoint
        assert A.adjoint().galois(k) == A.galois(k).adjoint()
        assert (A @ B).galois(k) == A.galois(k) @ B.galois(k)
        assert np.allclose(A.galois(k).to_complex(), A.to_complex(k))


def test_matrix_documents_round_trip(rng):
    A = random_cyc_matrix(rng, 2, 6, cols=3)
    assert CycMatrix.from_document(A.to_document()) == A
    assert A.shape == (2, 3)


def test_galois_orbit_examples():
    Z = CycMatrix.from_ints([[1, 2], [0, 3]])
    o = galois_orbit(Z)
    assert o.d == 1 and o.C == pytest.approx(np.linalg.norm([[1, 2], [0, 3]], 2), rel=1e-12)
    w = galois_orbit(CycMatrix.from_entries([[zeta(3)]]))
    assert w.d == 2 and w.C == pytest.approx(1.0, rel=1e-12)
    assert w.conjugates[0] == w.base


@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 4, 5, 8]))
@settings(max_examples=30, deadline=None)
def test_orbit_invariants(seed, m):
    A = random_cyc_matrix(np.random.default_rng(seed), 2, m)
    o = galois_orbit(A)
    assert o.d <= euler_phi(A.normalized().m)
    keys = {C.key() for C in o.conjugates}
    for C in o.conjugates:
        assert C.adjoint().adjoint().key() in keys
        assert C.conj().key() in keys


def test_norm_estimates(rng):
    X = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    exact = np.linalg.svd(X, compute_uv=False)[0]
    assert operator_norm_upper(X) >= exact
    assert operator_norm_upper(X) == pytest.approx(exact, rel=1e-12)
    assert power_iteration_norm(X) == pytest.approx(exact, rel=1e-6)
    assert operator_norm_upper(np.zeros((3, 3))) == 0 and power_iteration_norm(np.zeros((3, 3))) == 0


def test_det_plus_examples():
    assert det_plus(np.eye(4)) == pytest.approx(1.0)
    assert det_plus(np.diag([2.0, 0.0])) == pytest.approx(2.0)
    assert det_plus(np.zeros((3, 3))) == 1.0
    r = det_plus_report(np.diag([3.0, 1e-20, 2.0]))
    assert r.rank == 2 and r.value == pytest.approx(6.0) and r.largest_dropped == pytest.approx(1e-20)
    assert det_plus(np.array([[1.0, 2.0, 0.0]])) == pytest.approx(math.sqrt(5))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_det_plus_invariants(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    A = rng.normal(size=(n, n)) @ np.diag(rng.integers(0, 2, size=n).astype(float)) @ rng.normal(size=(n, n))
    U = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))[0]
    V = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))[0]
    d = det_plus(A, rtol=1e-9)
    assert det_plus(U @ A @ V, rtol=1e-9) == pytest.approx(d, rel=1e-8)
    assert det_plus(A.conj().T @ A, rtol=1e-9) == pytest.approx(d * d, rel=1e-7)
    # for a full-rank square matrix this is |det|
    B = rng.normal(size=(n, n))
    assert det_plus(B) == pytest.approx(abs(np.linalg.det(B)), rel=1e-8)


def test_determinant_bound_examples():
    P = CycMatrix.from_ints(np.eye(4, dtype=int)[[2, 0, 3, 1]])
    lhs, bound, ok = check_determinant_bound(P)
    assert galois_orbit(P).d == 1 and bound == 1.0 and lhs == pytest.approx(1.0) and ok
    A = CycMatrix.from_entries([[1, zeta(3)], [0, 1]])
    o = galois_orbit(A)
    assert o.d == 2 and lemma31_bound(o) == pytest.approx(o.C ** -3)
    assert check_determinant_bound(A)[2]
    assert lemma31_bound(galois_orbit(CycMatrix.zeros(2, 2))) == 1.0
    with pytest.raises(ValueError):
        lemma31_bound(galois_orbit(CycMatrix.zeros(2, 3)))


def test_crossed_product_small_cases():
    assert crossed_product_microstate(1) == [CycMatrix.from_ints([[1]])]
    mats = crossed_product_microstate(2)
    assert len(mats) == 4 and all(M.shape == (4, 4) for M in mats)
    assert {complex(M.entry(i, j)) for M in mats for i in range(4) for j in range(4)} <= {0, 1, -1}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_crossed_product_relations(n):
    mats = crossed_product_microstate(n)
    U, V = crossed_product_generators(n)
    I = CycMatrix.identity(n * n)
    w = zeta(n)
    assert U.power(n) == I and V.power(n) == I
    assert V @ U @ V.adjoint() == U.scale(w.conj())
    for chi, g in itertools.product(range(n), repeat=2):
        M = mats[crossed_product_index(n, chi, g)]
        assert M == U.power(chi) @ V.power(g)
        assert M @ M.adjoint() == I
        tr = 1 if chi == g == 0 else 0
        assert M.diagonal() == [Cyclotomic.integer(tr)] * (n * n)


def test_direct_sums():
    X = CycMatrix.from_ints([[0, 1], [1, 0]])
    Y = CycMatrix.from_ints([[1, 0], [0, -1]])
    ds = direct_sum_microstates([[X], [Y]], [Fraction(1, 3), Fraction(2, 3)])
    assert ds.multiplicities == (1, 2) and ds.weights == (Fraction(1, 3), Fraction(2, 3))
    assert ds.matrices[0].shape == (6, 6) and len(ds.projections) == 2
    assert ds.projections[0] + ds.projections[1] == CycMatrix.identity(6)
    one = direct_sum_microstates([[X]], [1])
    assert one.matrices == (X,) and one.projections == (CycMatrix.identity(2),)
    with pytest.raises(ValueError):
        direct_sum_microstates([[X]], [Fraction(1, 2)])
    with pytest.raises(ValueError):
        direct_sum_microstates([[X], [Y]], [Fraction(1, 1000), Fraction(999, 1000)], max_copies=10)


def test_tensor_microstates(rng):
    A, B = random_cyc_matrix(rng, 2, 4), random_cyc_matrix(rng, 3, 4)
    a1, b1 = tensor_microstates([A], [B])
    assert (a1 @ b1).trace() == A.trace() * B.trace()
    assert galois_orbit(a1).d == galois_orbit(A).d
    same = tensor_microstates([A], [CycMatrix.identity(1)])
    assert same[0] == A
    X, Y = rng.normal(size=(2, 2)), rng.normal(size=(3, 3))
    x1, y1 = tensor_microstates([X], [Y])
    assert np.allclose(x1 @ y1, np.kron(X, Y))


def test_diag_constancy():
    U, V = crossed_product_generators(3)
    polys = [parse_poly(f"s1^{a} s2^{b}", r=2, self_adjoint=False) for a in range(3) for b in range(3)]
    assert all(v == 0 for v in diag_constancy([U, V], polys).values())
    s1, = variables(1, self_adjoint=False)
    assert diag_constancy([CycMatrix.identity(3).scale(2)], [s1])[s1] == 0
    D = np.diag([1.0, 0.0, 0.0, 0.0])
    assert diag_constancy([D], [s1])[s1] == pytest.approx(math.sqrt(3) / 4)


def test_liminf_certificate_examples():
    s1, = variables(1, self_adjoint=False)
    perms = [[CycMatrix.from_ints(np.eye(n, dtype=int)[np.roll(np.arange(n), 1)])] for n in (2, 3, 4)]
    t = liminf_certificate(perms, s1)
    assert t.holds and all(r.det_plus_root == pytest.approx(1.0) for r in t.rows)
    t0 = liminf_certificate(perms, s1 * s1.star - 1)
    assert all(r.degenerate and r.det_plus_root == 1.0 for r in t0.rows)


def test_certificate_scales_rational_coefficients():
    P = parse_poly("s1", r=2, self_adjoint=False) + Cyclotomic.integer(Fraction(1, 2))
    t = liminf_certificate([list(crossed_product_generators(2))], P)
    assert t.scale == 2 and t.holds
