"""Walk through the six-vertex worked example: string partitions, quotients, component graphs, moments."""
import numpy as np

from graphprod.digraphs import colour_quotient, gcc, is_tree, rho_tuple, string_quotient
from graphprod.fixtures import load_appendix_example
from graphprod.traffic import expected_trace, permutation_average

G, A, T, expected = load_appendix_example()
print("colours:", G.colours, " adjacent pairs:", sorted(G.edges))
for s in A.strings:
    print(f"string {s} carries colours {A.colours_of(s)}")

# rho_s merges vertices joined by edges whose colour does not use string s
rho = rho_tuple(T, A)


def show(p):
    return " ".join("{" + ",".join(T.names[v] for v in b) + "}" for b in p.blocks)


for s in A.strings:
    print(f"rho_{s} = {show(rho[s])}")

# quotient digraphs at rho, as (vertices, edges)
for c in A.colours:
    print(f"colour quotient {c}:", colour_quotient(T, A, rho, c).shape())
for s in A.strings:
    print(f"string quotient {s}:", string_quotient(T, A, rho, s).shape())

# the component graphs decide which terms survive as N grows
for s in A.strings:
    g = gcc(T, A, rho, s)
    print(f"GCC for string {s}: {len(g.left)} + {len(g.right)} nodes, {len(g.edges)} edges, tree={is_tree(g)}")

# exact expected trace under independent colour permutations, against brute force
rng = np.random.default_rng(0)
payloads = {e.label: rng.normal(size=(2 ** len(A.strings_of(e.colour)),) * 2) for e in T.edges}
T = T.with_payloads(payloads)
report = expected_trace(T, A, 2)
print(f"expected trace at N=2: {report.value.real:.6f} from {len(report.term_breakdown)} partition tuples")
print(f"average over all permutation tuples: {permutation_average(T, A, 2).real:.6f}")
