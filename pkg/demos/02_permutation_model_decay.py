"""Centred alternating words in two colours on one shared string lose their diagonal as N grows."""
import json
from importlib import resources

import numpy as np

from graphprod.permmodel import independence_experiment

cfg = json.loads(resources.files("graphprod.data").joinpath("configs/two-free-M2.json").read_text())
params = dict(cfg["params"], seed=cfg["seed"], trials=100)
print("word:", params["words"][0], " generators: crossed-product matrices u+v and uv+v in M_4")

rows = independence_experiment(params)
print(f"{'N':>4} {'median':>10} {'mean':>10} {'max':>8}")
for r in rows:
    print(f"{r.N:>4} {r.median:>10.4f} {r.mean:>10.4f} {r.max:>8.3f}")

meds = [r.median for r in rows]
print("strictly decreasing:", all(a > b for a, b in zip(meds, meds[1:])))
print("last / first median:", meds[-1] / meds[0])

# The same statistic with random unitaries in M_4.  Size 2 would give exactly 0:
# the off-diagonal part of a padded 2x2 matrix pairs each index with one partner,
# so no closed walk of length 3 exists and the diagonal of the product vanishes.
params["generators"] = {c: {"source": "random_unitary", "dim": 4, "count": 2} for c in ("1", "2")}
params["N_schedule"] = [4, 8, 16, 32]
for r in independence_experiment(params):
    print(f"unitary generators, N={r.N:>3}: median {r.median:.4f}")
