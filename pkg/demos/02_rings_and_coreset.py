#!/usr/bin/env python3
# Anatomy of the compression step: baseline, doubling rings, weighted coreset.

from collections import Counter

from trimclust import (
    CoresetParams,
    PlantedConfig,
    baseline_solve,
    build_augmented_instance,
    build_coreset,
    coreset_size_bound,
    generate_planted,
    ring_partition,
    verify_ring_bounds,
)
from trimclust.rng import generator_for

inst, labels = generate_planted(
    PlantedConfig(
        clusters=2, points_per_cluster=60, spread=1.0, outlier_count=2,
        outlier_distance_factor=30.0, dimension=2, seed=424242,
    )
)
print(f"instance: {len(inst.clients)} clients, k={inst.k}, m={inst.m}")

# step 1: the outlier-free companion problem gets k+m centers and may open a
# center on any client; its optimum can only be cheaper than the original's
aug = build_augmented_instance(inst)
base = baseline_solve(aug)
print(f"baseline: {base.method}, {len(base.centers)} centers, cost {base.cost:.2f}")

# step 2: around each baseline center, clients fall into distance bands that
# double in radius; within a band, points are nearly interchangeable
rp = ring_partition(inst, base.centers, tau=1.0)
print(f"rings: R={rp.R:.3f}, phi={rp.phi}")
for (i, j), pts in sorted(rp.rings.items()):
    print(f"  center {rp.baseline[i]} band {j}: {len(pts)} clients")

# the ring radii and diameters are provably small multiples of the baseline
# cost; check-rings exposes the same numbers on the command line
rep = verify_ring_bounds(rp, inst)
print(
    f"ring sums: radius {rep.radius_sum:.1f} <= {rep.radius_bound:.1f}, "
    f"diameter {rep.diameter_sum:.1f} <= {rep.diameter_bound:.1f} -> {rep.passed}"
)

# step 3: big rings are resampled down to at most 2s weighted entries; small
# rings (in particular the far-away outliers) are kept verbatim
params = CoresetParams(mode="practical", practical_s=10)
cs = build_coreset(rp, params, generator_for(7, 1, 0))
print(f"\ncoreset: {len(cs)} entries for {len(inst.clients)} clients (s=10)")
print("  weights:", dict(Counter(cs.union.weights)))
print("  total weight:", cs.total_weight, "(always equals the client count)")
print("  size bound:", coreset_size_bound(10, rp.k, rp.m, rp.phi))
print("  sampled rings:", [key for key, small in cs.is_small.items() if not small])
