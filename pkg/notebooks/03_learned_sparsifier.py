"""Train the edge classifier, prune unseen instances, and measure the loss.

Small sizes keep this under a minute. The acceptance suite runs the same
pipeline at n = 50 with twenty training instances.
"""
import numpy as np

from tsp_sparsify import (FeatureConfig, TrainConfig, aggregate_summary, assemble_features, double_tree_tours,
                          enumerate_optimal_tours, evaluate_instance, generate_random_instance,
                          insert_tour_edges, predict_mask, prune_instance, summary_to_text, train_model)

train = []
for seed in range(8):
    inst = generate_random_instance(30, seed=100 + seed)
    train.append(assemble_features(inst, FeatureConfig(seed=seed), enumerate_optimal_tours(inst)))
model = train_model(train, TrainConfig(seed=0))
print("training confusion at 0.5:", model.metadata["confusion"])

reports = []
for seed in range(5):
    inst = generate_random_instance(30, seed=900 + seed)
    keep, prob = predict_mask(model, assemble_features(inst, FeatureConfig(seed=seed)))
    pruned = prune_instance(inst, keep)
    # inserting the double-tree tours guarantees at least one Hamiltonian cycle survives
    tours = double_tree_tours(inst)
    safe = insert_tour_edges(pruned, tours)
    reports.append(evaluate_instance(inst, safe, known_tours=tours, group="n=30"))
    print(f"{inst.name}: kept {pruned.m_hat}/{inst.m}, +{safe.m_hat - pruned.m_hat} inserted, "
          f"ratio {reports[-1].optimality_ratio:.4f}")

print(summary_to_text(aggregate_summary(reports)))

# Raising the threshold only ever removes edges.
inst = generate_random_instance(30, seed=999)
fm = assemble_features(inst)
kept = [int(predict_mask(model, fm, t)[0].sum()) for t in np.linspace(0.1, 0.9, 5)]
print("edges kept at thresholds 0.1..0.9:", kept)
