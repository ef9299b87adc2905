import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsp_sparsify.exact import (SizeError, blossom_rows, branch_and_cut, brute_force_optimal_tours,
                                enumerate_optimal_tours, held_karp)
from tsp_sparsify.graph import canonical_order, make_tour
from tsp_sparsify.lp import build_relaxation, cutting_plane_features
from tsp_sparsify.mincut import stoer_wagner
from tsp_sparsify.tsplib import edge_id, generate_random_instance

from conftest import explicit


@settings(max_examples=30, deadline=None)
@given(n=st.integers(4, 8), seed=st.integers(0, 10_000))
def test_held_karp_matches_permutation_search(n, seed):
    inst = generate_random_instance(n, seed)
    best, tours = brute_force_optimal_tours(inst)
    t = held_karp(inst)
    assert t.length == best
    assert canonical_order(t.order) in tours


@settings(max_examples=20, deadline=None)
@given(n=st.integers(4, 12), seed=st.integers(0, 10_000))
def test_branch_and_cut_matches_held_karp(n, seed):
    inst = generate_random_instance(n, seed)
    res = branch_and_cut(inst)
    assert res.proven
    assert res.length == held_karp(inst).length
    assert res.root_bound <= res.length + 1e-6


def test_branch_and_cut_both_backends_agree():
    for seed in range(3):
        inst = generate_random_instance(10, seed)
        a = branch_and_cut(inst, method="highs", use_heuristic=False)
        b = branch_and_cut(inst, method="simplex", use_heuristic=False)
        assert a.length == b.length == held_karp(inst).length


def test_branch_and_cut_without_heuristic_still_optimal():
    inst = generate_random_instance(14, 21)
    assert branch_and_cut(inst, use_heuristic=False).length == held_karp(inst).length


def test_held_karp_refuses_large_n():
    with pytest.raises(SizeError):
        held_karp(generate_random_instance(19, 0))
    assert held_karp(generate_random_instance(10, 0), cap=10).length > 0


def test_uniform_k4_has_three_optimal_tours(uniform):
    ts = enumerate_optimal_tours(uniform(4))
    assert len(ts.tours) == 3 and not ts.truncated
    assert ts.optimal_length == 4
    assert len({t.edge_set() for t in ts.tours}) == 3


def test_uniform_k5_has_twelve_optimal_tours(uniform):
    ts = enumerate_optimal_tours(uniform(5))
    assert len(ts.tours) == 12 and not ts.truncated


def test_graded_k4_has_unique_optimum(k4_graded):
    ts = enumerate_optimal_tours(k4_graded)
    assert [t.length for t in ts.tours] == [12]
    nxt = branch_and_cut(k4_graded, eliminated=ts.tours)
    assert nxt.length == 13


def test_cap_truncates_only_when_more_exist(uniform):
    ts = enumerate_optimal_tours(uniform(5), cap=1)
    assert len(ts.tours) == 1 and ts.truncated
    ts = enumerate_optimal_tours(uniform(4), cap=3)
    assert len(ts.tours) == 3 and not ts.truncated


def test_cheap_cycle_solves_at_the_root(cheap_cycle5):
    res = branch_and_cut(cheap_cycle5, use_heuristic=False)
    assert res.length == 5 and res.nodes == 1


@settings(max_examples=15, deadline=None)
@given(n=st.integers(4, 8), seed=st.integers(0, 10_000), ties=st.booleans())
def test_enumeration_is_complete(n, seed, ties):
    inst = generate_random_instance(n, seed, box=6.0 if ties else 1e6)
    best, expected = brute_force_optimal_tours(inst)
    ts = enumerate_optimal_tours(inst, cap=10_000)
    assert ts.optimal_length == best
    assert {t.order for t in ts.tours} == expected
    assert all(t.length == best for t in ts.tours)


def test_elimination_finds_the_second_best_tour():
    inst = generate_random_instance(7, 3)
    w = inst.weights
    lengths = sorted({sum(w[a, b] for a, b in zip((0,) + p, p + (0,)))
                      for p in itertools.permutations(range(1, 7))})
    ts = enumerate_optimal_tours(inst)
    assert ts.optimal_length == lengths[0]
    assert branch_and_cut(inst, eliminated=ts.tours).length == lengths[1]


def test_edge_mask_without_a_tour_is_proven_infeasible():
    inst = generate_random_instance(6, 0)
    mask = np.zeros(inst.m, dtype=bool)
    mask[:5] = True         # star around vertex 0 and nothing else
    res = branch_and_cut(inst, edge_mask=mask)
    assert res.tour is None and res.proven


def test_budget_exhaustion_is_reported():
    inst = generate_random_instance(40, 2)
    res = branch_and_cut(inst, node_budget=1, use_heuristic=False)
    assert not res.proven
    assert res.lp_solves <= 1


def test_initial_tour_and_lower_bound_stop_early():
    inst = generate_random_instance(12, 8)
    opt = held_karp(inst)
    res = branch_and_cut(inst, initial_tours=[opt], lower_bound=opt.length)
    assert res.proven and res.length == opt.length
    assert res.lp_solves <= 1


@settings(max_examples=10, deadline=None)
@given(n=st.integers(5, 10), seed=st.integers(0, 10_000))
def test_bounds_sandwich_the_optimum(n, seed):
    inst = generate_random_instance(n, seed)
    opt = held_karp(inst).length
    lp = cutting_plane_features(inst, 50).objectives[-1]
    res = branch_and_cut(inst)
    assert lp <= opt + 1e-6 and res.root_bound <= opt + 1e-6
    assert res.length == opt


def test_stoer_wagner_against_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(3, 8))
        w = np.triu(rng.integers(0, 5, size=(n, n)).astype(float), 1)
        w = w + w.T
        value, shore = stoer_wagner(w)
        best = min(w[np.ix_(list(s), [v for v in range(n) if v not in s])].sum()
                   for r in range(1, n) for s in itertools.combinations(range(n), r))
        assert value == pytest.approx(best)
        side = set(shore)
        assert 0 < len(side) < n
        other = [v for v in range(n) if v not in side]
        assert w[np.ix_(sorted(side), other)].sum() == pytest.approx(value)


def test_make_tour_from_explicit_rectangle(rectangle):
    assert make_tour([0, 1, 3, 2], rectangle).length == 60
    assert branch_and_cut(rectangle).length == 60


def test_explicit_zero_weights_give_zero_tour():
    inst = explicit(np.zeros((5, 5), dtype=int))
    assert branch_and_cut(inst).length == 0
    assert held_karp(inst).length == 0


def test_blossom_on_two_half_triangles():
    # triangles at 1/2 joined by a perfect matching at 1: each triangle is a handle with 3 teeth
    inst = generate_random_instance(6, 0)
    model = build_relaxation(inst)
    x = np.zeros(inst.m)
    for a, b in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        x[edge_id(a, b, 6)] = 0.5
    for a, b in [(0, 3), (1, 4), (2, 5)]:
        x[edge_id(a, b, 6)] = 1.0
    rows = blossom_rows(x, model)
    assert len(rows) == 2
    for pos, rhs in rows:
        assert rhs == 4 and x[pos].sum() == pytest.approx(4.5)


@settings(max_examples=10, deadline=None)
@given(n=st.integers(6, 8), seed=st.integers(0, 10_000))
def test_blossom_rows_never_cut_off_a_tour(n, seed):
    inst = generate_random_instance(n, seed)
    res = cutting_plane_features(inst, 30)
    rows = blossom_rows(res.solution.values, res.model)
    for perm in itertools.permutations(range(1, n)):
        x = np.zeros(inst.m)
        order = (0,) + perm
        for a, b in zip(order, order[1:] + order[:1]):
            x[edge_id(min(a, b), max(a, b), n)] = 1
        assert all(x[pos].sum() <= rhs for pos, rhs in rows)
