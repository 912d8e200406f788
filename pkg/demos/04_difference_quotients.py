"""Free difference quotients and the relation matrix D_F evaluated at microstates."""
import numpy as np

from graphprod.algnum import crossed_product_generators
from graphprod.freeprob import (
    build_DF,
    contract,
    evaluate,
    evaluate_DF,
    format_poly,
    free_difference_quotient,
    parse_poly,
    rank_defect_report,
)

P = parse_poly("s1 s2 s1 - 2 s2^2", r=2)
print("P =", format_poly(P))
print("d_1 P =", free_difference_quotient(P, 0))
print("d_2 P =", free_difference_quotient(P, 1))

# the contraction of d_i P against a direction E is the derivative of P along E
rng = np.random.default_rng(0)
X = [(lambda Z: (Z + Z.T) / 2)(rng.normal(size=(4, 4))) for _ in range(2)]
E = (lambda Z: (Z + Z.T) / 2)(rng.normal(size=(4, 4)))
h = 1e-6
fd = (evaluate(P, [X[0] + h * E, X[1]]) - evaluate(P, X)) / h
print("finite difference error:", np.max(np.abs(fd - contract(free_difference_quotient(P, 0), X, E))))

# a single commutator row has kernel of dimension N at a matrix with distinct eigenvalues
D = np.diag([1.0, 2.0, 3.0, 4.0])
rep = rank_defect_report(evaluate_DF(build_DF([], 1), [D]), 4)
print(f"commutator kernel fraction at diag(1..4): {rep.kernel_fraction}")

# relations of two anticommuting symmetries, satisfied by the M_4 microstates
F = [parse_poly(t, r=2) for t in ("s1^2 - 1", "s2^2 - 1", "s1 s2 + s2 s1")]
U, V = crossed_product_generators(2)
rep = rank_defect_report(evaluate_DF(build_DF(F, 2), [U, V]), 4)
print(f"M_4 relations: kernel dimension {rep.kernel_dim}, det+ = {rep.det_plus:.6g}")
