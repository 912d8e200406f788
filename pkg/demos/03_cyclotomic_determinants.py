"""Exact matrices over cyclotomic integers and lower bounds for pseudo-determinants."""
import numpy as np

from graphprod.algnum import (
    CycMatrix,
    check_determinant_bound,
    crossed_product_generators,
    det_plus,
    galois_orbit,
    liminf_certificate,
    random_cyc_matrix,
    zeta,
)
from graphprod.freeprob import law_of, parse_poly

print("zeta_3 + zeta_3^2 =", zeta(3) + zeta(3, 2))
print("zeta_4^2 =", zeta(4) ** 2)

# the crossed product of Z/3 by its dual is the full matrix algebra M_9
U, V = crossed_product_generators(3)
print("V U V* == zeta_3^{-1} U:", V @ U @ V.adjoint() == U.scale(zeta(3).conj()))
law = law_of([U, V], degree_cap=4)
print("tau(u v u* v*) =", law(((0, False), (1, False), (0, True), (1, True))))

# every Galois conjugate bounds the pseudo-determinant from below
A = CycMatrix.from_entries([[1, zeta(3)], [0, 1]])
orb = galois_orbit(A)
lhs, bound, ok = check_determinant_bound(A)
print(f"[[1, zeta_3], [0, 1]]: d={orb.d} C={orb.C:.4f} det+^(1/2)={lhs:.4f} >= {bound:.4f}: {ok}")

rng = np.random.default_rng(1)
slack = []
for k in range(100):
    M = random_cyc_matrix(rng, int(rng.integers(1, 7)), [1, 2, 3, 4, 6][k % 5])
    lhs, bound, ok = check_determinant_bound(M)
    assert ok
    slack.append(lhs / bound)
print(f"100 random matrices: smallest ratio det+^(1/N) / bound = {min(slack):.3f}")

# certificates for a polynomial evaluated along the microstates of M_4 and M_9
P = parse_poly("1 + s2 + s2^2 + s1", r=2, self_adjoint=False)
table = liminf_certificate([list(crossed_product_generators(n)) for n in (2, 3)], P)
for r in table.rows:
    print(f"size {r.size}: det+^(1/N) = {r.det_plus_root:.4f}, uniform bound {table.uniform_bound:.4g}")
print("diag(2, 0) has det+ =", det_plus(np.diag([2.0, 0.0])))
