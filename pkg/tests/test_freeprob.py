from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphprod.algnum import CycMatrix, Cyclotomic, crossed_product_generators, zeta
from graphprod.freeprob import (
    NcBiPoly,
    NcPoly,
    PolyParseError,
    build_DF,
    contract,
    evaluate,
    evaluate_bipoly,
    evaluate_DF,
    evaluate_matrix,
    format_poly,
    free_difference_quotient,
    law_of,
    moment_matrix,
    parse_poly,
    rank_defect_report,
    variables,
)

SA2 = (True, True)


@st.composite
def polys(draw, r=2, max_degree=4, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        d = draw(st.integers(0, max_degree))
        w = tuple((draw(st.integers(0, r - 1)), False) for _ in range(d))
        terms[w] = Cyclotomic.integer(draw(st.integers(-3, 3)))
    return NcPoly((True,) * r, terms)


def one(flags=SA2):
    return NcPoly.constant(1, flags)


def hermitian(rng, n):
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (Z + Z.conj().T) / 2


def test_difference_quotient_examples():
    s1, s2 = variables(2)
    T = NcBiPoly.tensor
    assert free_difference_quotient(s1, 0) == T(one(), one())
    assert free_difference_quotient(s1 * s2, 0) == T(one(), s2)
    assert free_difference_quotient(s1 * s1, 0) == T(one(), s1) + T(s1, one())
    assert free_difference_quotient(s2 * s2, 0) == NcBiPoly.zero(SA2)
    with pytest.raises(ValueError):
        free_difference_quotient(variables(1, self_adjoint=False)[0], 0)


@given(polys(), polys(), st.integers(0, 1))
@settings(max_examples=200, deadline=None)
def test_difference_quotient_is_a_derivation(P, Q, i):
    d = free_difference_quotient
    assert d(P * Q, i) == d(P, i) * Q + P * d(Q, i)
    assert d(P + Q, i) == d(P, i) + d(Q, i)


@given(polys(max_degree=3), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_finite_difference_matches_contraction(P, seed):
    rng = np.random.default_rng(seed)
    X = [hermitian(rng, 3) / 2 for _ in range(2)]
    E = [hermitian(rng, 3) for _ in range(2)]
    h = 1e-6
    base = evaluate(P, X)
    for i in range(2):
        moved = list(X)
        moved[i] = X[i] + h * E[i]
        fd = (np.asarray(evaluate(P, moved)) - np.asarray(base)) / h
        exact = contract(free_difference_quotient(P, i), X, E[i])
        assert np.max(np.abs(fd - exact)) < 1e-4


def test_bipoly_evaluation_is_multiplicative(rng):
    s1, s2 = variables(2)
    X = [hermitian(rng, 3) for _ in range(2)]
    T = NcBiPoly.tensor
    pairs = [(s1, s2 * s1), (s2, one()), (s1 * s1, s2), (one(), s1)]
    for a, b in pairs:
        for c, d in pairs:
            lhs = evaluate_bipoly(T(a, b).op_mul(T(c, d)), X)
            rhs = evaluate_bipoly(T(a, b), X) @ evaluate_bipoly(T(c, d), X)
            assert np.allclose(lhs, rhs)
    assert T(a, b).op_mul(T(c, d)) == T(a * c, d * b)


def test_bimodule_actions():
    s1, s2 = variables(2)
    T = NcBiPoly.tensor
    assert T(s1, s2).left_mul(s2) == T(s2 * s1, s2)
    assert T(s1, s2).right_mul(s1) == T(s1, s2 * s1)


def test_unit_tensor_evaluates_to_identity(rng):
    X = [hermitian(rng, 4)]
    assert np.allclose(evaluate_bipoly(NcBiPoly.one((True,)), X), np.eye(16))


def test_relation_matrix_forms():
    (s,) = variables(1)
    T = NcBiPoly.tensor
    o = one((True,))
    comm = T(s, o) - T(o, s)
    assert build_DF([s], 1) == [[comm], [T(o, o)]]
    assert build_DF([s * s - 1], 1) == [[comm], [T(o, s) + T(s, o)]]
    D = build_DF([], 2)
    assert len(D) == 1 and len(D[0]) == 2
    F = [parse_poly("s1^2 - 1", r=2), parse_poly("s1 s2 + s2 s1", r=2)]
    assert [len(row) for row in build_DF(F, 2)] == [2, 2, 2]


def test_commutator_kernel_on_diagonal_matrices():
    (s,) = variables(1)
    D = build_DF([], 1)
    for d in ([1.0, 2.0, 3.0], [1.0, 1.0, 2.0, 2.0], [5.0, 5.0, 5.0]):
        M = evaluate_DF(D, [np.diag(d)])
        N = len(d)
        rep = rank_defect_report(M, N)
        assert rep.kernel_dim == sum(a == b for a in d for b in d)
        if len(set(d)) == N:
            assert rep.kernel_fraction == pytest.approx(1 / N)


def test_full_rank_relation_matrix_has_no_kernel(rng):
    (s,) = variables(1)
    M = evaluate_DF(build_DF([s], 1), [hermitian(rng, 3)])
    assert M.shape == (18, 9)
    assert rank_defect_report(M, 3).kernel_fraction == 0


def test_matrix_algebra_relations_have_trivial_kernel():
    U, V = crossed_product_generators(2)
    assert U.adjoint() == U and V.adjoint() == V
    F = [parse_poly("s1^2 - 1", r=2), parse_poly("s2^2 - 1", r=2), parse_poly("s1 s2 + s2 s1", r=2)]
    M = evaluate_DF(build_DF(F, 2), [U, V])
    rep = rank_defect_report(M, 4)
    assert rep.kernel_dim == 0 and rep.det_plus > 0


def test_evaluate_examples(rng):
    t1, t2 = variables(2, self_adjoint=False)
    P = CycMatrix.from_ints(np.eye(3, dtype=int)[[1, 2, 0]])
    assert evaluate(t1 * t1.star, [P, P]) == CycMatrix.identity(3)
    A, B = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    assert np.allclose(evaluate(t1 + t2, [A, B]), A + B)
    assert np.allclose(evaluate(t1.star * t2, [A + 1j * B, B]), (A + 1j * B).conj().T @ B)
    W = evaluate_matrix([[t1, t2], [t2 * t1, NcPoly.constant(2, (False, False))]], [A, B])
    assert np.allclose(W, np.block([[A, B], [B @ A, 2 * np.eye(2)]]))
    with pytest.raises(ValueError):
        evaluate(t1, [A])


def test_exact_evaluation_with_cyclotomic_coefficients():
    U, V = crossed_product_generators(3)
    P = parse_poly("c(3; 0, 1) s1 s2 + s2*", r=2, self_adjoint=False)
    val = evaluate(P, [U, V])
    assert isinstance(val, CycMatrix)
    assert val == (U @ V).scale(zeta(3)) + V.adjoint()


def test_laws_of_crossed_product_microstates_are_exact():
    U, V = crossed_product_generators(3)
    law = law_of([U, V], degree_cap=4)
    assert law.is_exact() and law(()) == 1
    for w, val in law.moments.items():
        star = tuple((i, not s) for i, s in reversed(w))
        assert law(star) == val.conj()
    (u, v) = variables(2, self_adjoint=False)
    assert law(u * v * u.star * v.star) == zeta(3) or law(u * v * u.star * v.star) == zeta(3, 2)
    assert law(u * u * u) == 1 and law(u * v) == 0
    H = moment_matrix(law)
    assert np.allclose(H, H.conj().T) and np.linalg.eigvalsh(H).min() >= -1e-9


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_numeric_laws_have_psd_moment_matrices(seed):
    rng = np.random.default_rng(seed)
    X = [hermitian(rng, 3), rng.normal(size=(3, 3))]
    law = law_of(X, degree_cap=4, self_adjoint=[True, False])
    assert law(()) == pytest.approx(1)
    H = moment_matrix(law)
    assert np.linalg.eigvalsh((H + H.conj().T) / 2).min() >= -1e-9 * max(1, np.abs(H).max())


@pytest.mark.parametrize("text", ["s1 s2* - 2 s1^2 + c(3; 0,1) s2", "(s1 + s2)^3", "-s1 + 4", "s2 (s1 - 1) s2*", "c(1; 1/2) s1 - c(4; 0, -1/3)"])
def test_parse_and_format_round_trip(text):
    P = parse_poly(text, r=2, self_adjoint=False)
    assert parse_poly(format_poly(P), r=2, self_adjoint=False) == P


@given(polys(max_degree=3))
@settings(max_examples=100, deadline=None)
def test_format_round_trip_for_random_polynomials(P):
    assert parse_poly(format_poly(P), r=2) == P


def test_parser_semantics():
    s1, s2 = variables(2)
    assert parse_poly("(s1 + s2)^2", r=2) == s1 * s1 + s1 * s2 + s2 * s1 + s2 * s2
    assert parse_poly("s1*", r=2) == s1


@pytest.mark.parametrize("text, column", [("s1 + $", 6), ("s3", 1), ("(s1 + s2", 1), ("s1 ^ s2", 6), ("s1 s2 )", 7)])
def test_parse_errors_report_the_column(text, column):
    with pytest.raises(PolyParseError) as info:
        parse_poly(text, r=2)
    assert info.value.pos + 1 == column
