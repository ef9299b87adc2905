import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsp_sparsify.exact import held_karp
from tsp_sparsify.graph import (ConnectivityError, PartialExtractionError, TourError, UnionFind,
                                WeightedGraph, double_tree_tours, heuristic_tour, improve_tour,
                                make_tour, minimum_spanning_tree, successive_mst_extract,
                                tour_length, tree_weight)
from tsp_sparsify.tsplib import generate_random_instance

from conftest import explicit


def one_based(edges):
    return sorted((a + 1, b + 1) for a, b in edges)


def brute_force_mst_weight(g):
    """Minimum over all (n-1)-edge subsets that connect every vertex."""
    edges = list(zip(g.u.tolist(), g.v.tolist(), g.w.tolist()))
    best = None
    for combo in itertools.combinations(edges, g.n - 1):
        uf = UnionFind(g.n)
        if all(uf.union(a, b) for a, b, _ in combo):
            total = sum(c for _, _, c in combo)
            best = total if best is None else min(best, total)
    return best


def test_k3_mst():
    g = WeightedGraph.from_edges(3, [(0, 1, 1), (0, 2, 2), (1, 2, 3)])
    tree = minimum_spanning_tree(g)
    assert one_based(tree) == [(1, 2), (1, 3)]
    assert tree_weight(g, tree) == 3


def test_uniform_k4_tie_break_is_a_star():
    g = WeightedGraph.complete(explicit(1 - np.eye(4, dtype=int)))
    assert one_based(minimum_spanning_tree(g)) == [(1, 2), (1, 3), (1, 4)]


def test_tree_input_is_returned_unchanged():
    g = WeightedGraph.from_edges(5, [(0, 1, 4), (1, 2, 1), (2, 3, 9), (3, 4, 2)])
    assert set(minimum_spanning_tree(g)) == g.edge_set()


def test_disconnected_graph_raises():
    g = WeightedGraph.from_edges(4, [(0, 1, 1), (2, 3, 1)])
    with pytest.raises(ConnectivityError):
        minimum_spanning_tree(g)


def test_graph_rejects_bad_edges():
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 0, 1)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 1, 1), (1, 0, 2)])


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 7), seed=st.integers(0, 10_000))
def test_mst_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    w = rng.integers(0, 6, size=(n, n))
    w = np.triu(w, 1) + np.triu(w, 1).T
    g = WeightedGraph.complete(explicit(w))
    tree = minimum_spanning_tree(g)
    assert len(tree) == n - 1
    assert tree_weight(g, tree) == brute_force_mst_weight(g)
    assert minimum_spanning_tree(g) == tree


def test_successive_extraction_on_graded_k4(k4_graded):
    ext = successive_mst_extract(WeightedGraph.complete(k4_graded), 2)
    assert one_based(ext.level_edges(1)) == [(1, 2), (2, 3), (3, 4)]
    assert one_based(ext.level_edges(2)) == [(1, 3), (1, 4), (2, 4)]


def test_single_level_is_the_mst():
    inst = generate_random_instance(9, 4)
    g = WeightedGraph.complete(inst)
    assert successive_mst_extract(g, 1).level_edges(1) == minimum_spanning_tree(g)


def test_k5_two_levels_has_eight_edges():
    ext = successive_mst_extract(WeightedGraph.complete(generate_random_instance(5, 2)), 2)
    assert len(ext.levels) == 8


def test_extraction_reports_partial_levels():
    # K4 has 6 edges: two trees use all of them, a third cannot exist
    with pytest.raises(PartialExtractionError) as info:
        successive_mst_extract(WeightedGraph.complete(generate_random_instance(4, 0)), 3)
    assert info.value.extraction.k_max == 2


@settings(max_examples=25, deadline=None)
@given(n=st.integers(6, 30), seed=st.integers(0, 10_000), data=st.data())
def test_extraction_levels_partition(n, seed, data):
    # greedy removal can disconnect the residual graph before n/2 levels, so
    # a partial result must still consist of whole, disjoint trees
    k = data.draw(st.integers(1, n // 2))
    g = WeightedGraph.complete(generate_random_instance(n, seed))
    try:
        ext = successive_mst_extract(g, k)
    except PartialExtractionError as exc:
        ext = exc.extraction
        assert ext.k_max < k
    assert len(ext.levels) == ext.k_max * (n - 1)
    for j in range(1, ext.k_max + 1):
        assert len(ext.level_edges(j)) == n - 1


@pytest.mark.parametrize("n", [16, 50, 100])
def test_default_depth_extraction_completes(n):
    from tsp_sparsify.lp import default_k
    k = default_k(n)
    ext = successive_mst_extract(WeightedGraph.complete(generate_random_instance(n, 11)), k)
    assert len(ext.levels) == k * (n - 1)


def test_tour_lengths(k4_graded, uniform):
    assert tour_length([0, 1, 2, 3], k4_graded) == 12
    for perm in itertools.permutations(range(4)):
        assert tour_length(perm, uniform(4)) == 4


def test_tour_with_repeat_is_rejected(k4_graded):
    with pytest.raises(TourError):
        tour_length([0, 1, 1, 3], k4_graded)


def test_double_tree_rectangle(rectangle):
    forward, backward = double_tree_tours(rectangle)
    assert forward.order == (0, 1, 2, 3)
    assert forward.length == 64
    assert held_karp(rectangle).length == 60
    assert backward.length <= 2 * 40


def test_double_tree_uniform(uniform):
    assert [t.length for t in double_tree_tours(uniform(4))] == [4, 4]


def test_double_tree_triangle():
    inst = generate_random_instance(4, 1)
    tri = explicit(inst.weights[:3, :3])
    a, b = double_tree_tours(tri)
    assert a.edge_set() == b.edge_set() == frozenset({(0, 1), (0, 2), (1, 2)})


@settings(max_examples=20, deadline=None)
@given(n=st.integers(4, 11), seed=st.integers(0, 10_000))
def test_double_tree_bound(n, seed):
    inst = generate_random_instance(n, seed)
    g = WeightedGraph.complete(inst)
    mst = tree_weight(g, minimum_spanning_tree(g))
    opt = held_karp(inst).length
    for t in double_tree_tours(inst):
        assert opt <= t.length <= 2 * mst
    assert double_tree_tours(inst) == double_tree_tours(inst)


def test_local_search_never_worsens():
    for seed in range(5):
        inst = generate_random_instance(40, seed)
        start = make_tour(list(range(40)), inst)
        better = improve_tour(start, inst)
        assert better.length <= start.length
        assert sorted(better.order) == list(range(40))
        assert heuristic_tour(inst).length <= min(t.length for t in double_tree_tours(inst))
