"""The training-free baseline: keep k successive minimum spanning trees.

With n = 100 and k = 7 exactly 693 of 4950 edges survive (pruning rate 0.86).
The double-tree example on a 20 x 10 rectangle shows the worst case that
insertion guards against: the double-tree tour costs 64 against an optimum of 60.
"""
from tsp_sparsify import (Instance, WeightKind, aggregate_summary, double_tree_tours, evaluate_instance,
                          generate_random_instance, held_karp, insert_tour_edges, mst_only_sparsify,
                          summary_to_text)

reports = []
for seed in range(5):
    inst = generate_random_instance(100, seed=2000 + seed)
    s = mst_only_sparsify(inst, 7)
    reports.append(evaluate_instance(inst, s, group="k=7"))
    tours = double_tree_tours(inst)
    reports.append(evaluate_instance(inst, insert_tour_edges(s, tours), known_tours=tours, group="k=7 + tours"))
print(summary_to_text(aggregate_summary(reports)))

rect = Instance("rect", 4, WeightKind.EUC_2D, coords=[(0, 0), (0, 10), (20, 0), (20, 10)])
forward, backward = double_tree_tours(rect)
print("double-tree tour", forward.length, "optimum", held_karp(rect).length)
