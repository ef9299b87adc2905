"""Learned sparsification of symmetric TSP instances.

Edges are scored by a logistic-regression classifier over LP reduced-cost,
successive-MST and local weight-ratio features; pruned graphs can be made
feasible again by inserting double-tree tours.
"""
from .evaluation import EvaluationReport, aggregate_summary, evaluate_instance, reports_to_csv, summary_to_text
from .exact import TourSet, branch_and_cut, enumerate_optimal_tours, held_karp
from .features import FEATURE_NAMES, FeatureConfig, FeatureMatrix, assemble_features, label_edges
from .graph import Tour, WeightedGraph, double_tree_tours, minimum_spanning_tree, successive_mst_extract, tour_length
from .lp import (build_relaxation, cutting_plane_features, integral_tour_check, perturbed_mean_reduced_costs,
                 separate_subtours, solve_lp)
from .sparsifier import (Model, TrainConfig, insert_tour_edges, load_model, mst_only_sparsify, predict_mask,
                         prune_instance, save_model, train_model)
from .tsplib import (Instance, SparsifiedInstance, WeightKind, edge_weight, generate_random_instance, parse_instance,
                     read_instance, read_sparsified, write_instance, write_sparsified)

__all__ = [
    "EvaluationReport",
    "aggregate_summary",
    "evaluate_instance",
    "reports_to_csv",
    "summary_to_text",
    "TourSet",
    "branch_and_cut",
    "enumerate_optimal_tours",
    "held_karp",
    "FEATURE_NAMES",
    "FeatureConfig",
    "FeatureMatrix",
    "assemble_features",
    "label_edges",
    "Tour",
    "WeightedGraph",
    "double_tree_tours",
    "minimum_spanning_tree",
    "successive_mst_extract",
    "tour_length",
    "build_relaxation",
    "cutting_plane_features",
    "integral_tour_check",
    "perturbed_mean_reduced_costs",
    "separate_subtours",
    "solve_lp",
    "Model",
    "TrainConfig",
    "insert_tour_edges",
    "load_model",
    "mst_only_sparsify",
    "predict_mask",
    "prune_instance",
    "save_model",
    "train_model",
    "Instance",
    "SparsifiedInstance",
    "WeightKind",
    "edge_weight",
    "generate_random_instance",
    "parse_instance",
    "read_instance",
    "read_sparsified",
    "write_instance",
    "write_sparsified",
]

__version__ = "0.1.0"
