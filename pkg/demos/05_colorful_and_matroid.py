#!/usr/bin/env python3
# Two constrained variants: per-color outlier budgets, and centers that must
# form an independent set of a matroid.  Both reuse the same reduction.

import numpy as np

from trimclust import (
    ColorfulInstance,
    CoresetParams,
    EuclideanOracle,
    MetricInstance,
    PartitionMatroid,
    SolverHandle,
    colorful_oracle,
    colorful_solve,
    direct_sum_matroid,
    matroid_median_oracle,
    matroid_median_solve,
)

rng = np.random.default_rng(7)

# ---- colorful: each color class has its own eviction budget -------------
coords = rng.uniform(0, 100, size=(16, 2))
inst = MetricInstance(tuple(range(12)), tuple(range(12, 16)), EuclideanOracle(coords), k=2, m=3)
colors = {p: 1 + (p % 2) for p in inst.clients}  # alternate two colors
cinst = ColorfulInstance(base=inst, colors=colors, budgets=(2, 1))

params = CoresetParams(mode="practical", practical_s=12)
sol = colorful_solve(cinst, params, SolverHandle.exact(), seed=3, rounds=1)
ora = colorful_oracle(cinst)
print("colorful: solve", round(sol.cost, 3), "oracle", round(ora.cost, 3))
evicted = {t: sum(1 for p in sol.outliers if colors[p] == t) for t in (1, 2)}
print("  evicted per color:", evicted, "budgets:", cinst.budgets)

# ---- matroid: at most one center per facility group ----------------------
coords = rng.uniform(0, 100, size=(15, 2))
inst = MetricInstance(tuple(range(10)), tuple(range(10, 15)), EuclideanOracle(coords), k=3, m=1)
matroid = PartitionMatroid([((10, 11), 1), ((12, 13), 1), ((14,), 1)])

sol = matroid_median_solve(inst, matroid, CoresetParams(mode="practical", practical_s=10),
                           SolverHandle.exact(), seed=5, rounds=1)
ora = matroid_median_oracle(inst, matroid)
print("\nmatroid: solve", round(sol.cost, 3), "oracle", round(ora.cost, 3))
print("  centers", sol.centers, "independent:", matroid.is_independent(sol.centers))

# the baseline behind the scenes works over the direct sum with a small
# uniform matroid on the clients (the would-be outliers become centers)
aug = direct_sum_matroid(matroid, inst.clients, inst.m)
print("  direct-sum rank:", aug.rank, "=", matroid.rank, "+", inst.m)
print("  facility part still capped:", not aug.is_independent([10, 11]))
