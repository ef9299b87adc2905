"""What the classifier sees: per-edge features and labels.

Local weight ratios, cutting-plane reduced costs (plain and objective-perturbed)
and the successive-MST level of each edge. Labels mark edges used by any
optimal tour.
"""
import numpy as np

from tsp_sparsify import (FeatureConfig, assemble_features, cutting_plane_features, enumerate_optimal_tours,
                          generate_random_instance)

inst = generate_random_instance(30, seed=3)

cp = cutting_plane_features(inst, max_rounds=5)
print("relaxation objective by round:", [round(o) for o in cp.objectives])

fm = assemble_features(inst, FeatureConfig(seed=0), enumerate_optimal_tours(inst))
print("columns:", fm.names)
pos = fm.labels == 1
for name in ("q_a", "r_hat", "r_tilde", "q_mst"):
    col = fm.column(name)
    print(f"{name:8s} mean on optimal edges {col[pos].mean():+.3f}   elsewhere {col[~pos].mean():+.3f}")

# Optimal-tour edges are rare, which is why training reweights the classes.
print(f"{pos.sum()} positive edges out of {len(fm)}")
print("edges taken by the first MST that are also optimal:",
      int(np.sum((fm.column("q_mst") == 1.0) & pos)), "of", inst.n - 1)
