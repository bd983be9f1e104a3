#!/usr/bin/env python3
# Why ring sampling is safe: a uniform sample's trimmed cost tracks the full
# set's trimmed cost, simultaneously for every small trim count.

from trimclust import PlantedConfig, SampleCheckConfig, generate_planted, sample_concentration_check
from trimclust.rng import generator_for

inst, _ = generate_planted(
    PlantedConfig(
        clusters=1, points_per_cluster=500, spread=1.0, outlier_count=0,
        outlier_distance_factor=10.0, dimension=2, seed=2024,
    )
)
V = inst.clients
C = inst.facilities[:2]  # any fixed center set works; fix it before sampling

cfg = SampleCheckConfig(xi=0.3, q=2, lambda_prime=0.05)
print(f"|V|={len(V)}, sample size s'={cfg.sample_size}, trims checked: 0..{cfg.q}")

rep = sample_concentration_check(inst.dist, V, C, cfg, trials=1000, rng=generator_for(5, 2, 0))
print(f"allowed deviation: {rep.bound:.1f}")
print(f"observed worst deviation over 1000 trials: {rep.max_deviation:.1f}")
print(f"mean deviation: {rep.mean_deviation:.1f}")
print(f"violation fraction: {rep.violation_fraction:.4f} (promise: <= {cfg.lambda_prime})")
print("diagnostics:", {k: round(v, 2) for k, v in rep.diagnostics.items()})

# the same harness with replacement mimics the coreset's own draw scheme
cfg_wr = SampleCheckConfig(xi=0.3, q=2, lambda_prime=0.05, with_replacement=True)
rep_wr = sample_concentration_check(inst.dist, V, C, cfg_wr, trials=1000, rng=generator_for(6, 2, 0))
print(f"\nwith replacement instead: violation fraction {rep_wr.violation_fraction:.4f}")
