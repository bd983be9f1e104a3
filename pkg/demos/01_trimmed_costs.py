#!/usr/bin/env python3
# Trimmed cost functions: what "m outliers" means once centers are fixed.

import numpy as np

from trimclust import (
    EuclideanOracle,
    MetricInstance,
    farthest_points,
    trimmed_cost,
    trimmed_sum,
    weighted_trimmed_cost,
)

# trimmed_sum drops the largest values before summing
print("trimmed_sum([7,2,2,9,4], drop=2) =", trimmed_sum([7, 2, 2, 9, 4], 2))  # 8

# a tiny 1-D instance: clients at 0, 1, 10 and 50, facilities at 0 and 10
coords = np.array([[0.0], [1.0], [10.0], [50.0], [0.0], [10.0]])
inst = MetricInstance(
    clients=(0, 1, 2, 3),
    facilities=(4, 5),
    dist=EuclideanOracle(coords),
    k=1,
    m=1,
)

C = (4,)  # the facility at coordinate 0
print("\ncenters at coordinate 0, one outlier allowed")
print("  cost with no trimming:", trimmed_cost(inst.dist, inst.clients, C, 0))
print("  cost after dropping the worst client:", trimmed_cost(inst.dist, inst.clients, C, 1))
print("  which client is evicted:", farthest_points(inst.dist, inst.clients, C, 1))

# squared distances (the means objective) just change the exponent
print("  same with z=2:", trimmed_cost(inst.dist, inst.clients, C, 1, z=2.0))

# weighted points contribute distance * weight as one atomic value;
# trimming removes whole entries, it never splits a weight
pts, w = (1, 2), (3, 1)  # point at 1 with weight 3, point at 10 with weight 1
print("\nweighted entries (1 w=3 -> value 3, 10 w=1 -> value 10) vs centers at 0:")
print("  keep both:", weighted_trimmed_cost(inst.dist, pts, w, C, 0))
print("  drop the single largest entry:", weighted_trimmed_cost(inst.dist, pts, w, C, 1))
