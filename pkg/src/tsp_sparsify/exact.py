"""Exact TSP solving at desk scale: Held-Karp, branch-and-cut, all optimal tours."""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .graph import Tour, UnionFind, canonical_order, heuristic_tour, make_tour
from .lp import (LpModel, SubtourCut, build_relaxation, integral_tour_check, open_relaxation,
                 separate_subtours)
from .mincut import stoer_wagner
from .tsplib import Instance, edge_id

HELD_KARP_CAP = 18
DEFAULT_NODE_BUDGET = 1_000_000
DEFAULT_TOUR_CAP = 32
MINCUT_SLACK = 1e-6
BOUND_TOL = 1e-6


class SizeError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


def held_karp(inst: Instance, cap: int = HELD_KARP_CAP) -> Tour:
    """Optimal tour by subset dynamic programming, vertex 0 fixed as the start."""
    n = inst.n
    if n > cap:
        raise SizeError(f"held_karp is capped at n={cap}; use branch_and_cut for n={n}")
    if n < 3:
        raise SizeError("need at least 3 vertices")
    w = np.asarray(inst.weights, dtype=np.int64)
    k = n - 1
    inner = w[1:, 1:]
    big = np.iinfo(np.int64).max // 4
    dp = np.full((1 << k, k), big, dtype=np.int64)
    parent = np.full((1 << k, k), -1, dtype=np.int8)
    for j in range(k):
        dp[1 << j, j] = w[0, j + 1]
    bits = np.arange(k)
    for mask in range(1, 1 << k):
        row = dp[mask]
        inside = (mask >> bits) & 1 == 1
        out = np.flatnonzero(~inside)
        if out.size == 0:
            continue
        cand = row[:, None] + inner[:, out]          # (from j, to out)
        cand[~inside] = big
        arg = np.argmin(cand, axis=0)
        val = cand[arg, np.arange(out.size)]
        new = mask | (1 << out)
        better = val < dp[new, out]
        dp[new[better], out[better]] = val[better]
        parent[new[better], out[better]] = arg[better]
    full = (1 << k) - 1
    closing = dp[full] + w[1:, 0]
    last = int(np.argmin(closing))
    order = []
    mask = full
    while last >= 0:
        order.append(last + 1)
        prev = int(parent[mask, last])
        mask ^= 1 << last
        last = prev
    order.append(0)
    return make_tour(canonical_order(order[::-1]), inst)


def brute_force_optimal_tours(inst: Instance) -> tuple[int, set[tuple[int, ...]]]:
    """Every optimal tour by permutation search (vertex 0 first); small n only."""
    w = inst.weights
    best, found = None, set()
    for perm in itertools.permutations(range(1, inst.n)):
        if perm[0] > perm[-1]:
            continue
        order = (0,) + perm
        length = int(sum(w[a, b] for a, b in zip(order, order[1:] + order[:1])))
        if best is None or length < best:
            best, found = length, {canonical_order(order)}
        elif length == best:
            found.add(canonical_order(order))
    return best, found


# --------------------------------------------------------------------------- branch and cut

@dataclass(order=True)
class BranchNode:
    bound: float
    seq: int
    fixed0: frozenset = field(compare=False, default=frozenset())
    fixed1: frozenset = field(compare=False, default=frozenset())
    depth: int = field(compare=False, default=0)


@dataclass
class BranchAndCutResult:
    tour: Optional[Tour]
    proven: bool
    bound: float
    root_bound: float
    nodes: int
    lp_solves: int
    cuts: int

    @property
    def length(self) -> Optional[int]:
        return None if self.tour is None else self.tour.length

    @property
    def feasible(self) -> bool:
        return self.tour is not None


def _mincut_cut(x: np.ndarray, model: LpModel) -> Optional[SubtourCut]:
    """Global min-cut separation on the support graph, after shrinking x_e = 1 edges."""
    uf = UnionFind(model.n)
    for a, b in zip(model.u[x >= 1.0 - 1e-9].tolist(), model.v[x >= 1.0 - 1e-9].tolist()):
        uf.union(a, b)
    roots = np.array([uf.find(i) for i in range(model.n)])
    labels = np.unique(roots, return_inverse=True)[1]
    k = int(labels.max()) + 1
    if k < 2:
        return None
    support = x > 1e-9
    cap = np.zeros((k, k))
    np.add.at(cap, (labels[model.u[support]], labels[model.v[support]]), x[support])
    cap = cap + cap.T
    np.fill_diagonal(cap, 0.0)
    value, shore = stoer_wagner(cap)
    if value >= 2.0 - MINCUT_SLACK:
        return None
    side = set(np.flatnonzero(np.isin(labels, shore)).tolist())
    other = set(range(model.n)) - side
    w = side if len(side) <= len(other) else other
    if len(w) < 3:
        w = other if w is side else side
    return SubtourCut(frozenset(w)) if 3 <= len(w) <= model.n - 1 else None


def blossom_rows(x: np.ndarray, model: LpModel, eps: float = 1e-6) -> list[tuple[np.ndarray, int]]:
    """Violated 2-matching (blossom) rows found by the odd-component heuristic.

    Each connected component H of the fractional edges is a handle; the
    edges at 1 leaving H are the teeth. With an odd number t >= 3 of disjoint
    teeth, x(E(H)) + x(teeth) <= |H| + (t - 1) / 2 holds for every tour but
    is violated here.
    """
    frac = (x > eps) & (x < 1.0 - eps)
    if not frac.any():
        return []
    g = sparse.coo_matrix((np.ones(int(frac.sum())), (model.u[frac], model.v[frac])), shape=(model.n, model.n))
    _, labels = connected_components(g, directed=False)
    touched = np.unique(np.concatenate([model.u[frac], model.v[frac]]))
    ones = np.flatnonzero(x >= 1.0 - eps)
    rows = []
    for comp in np.unique(labels[touched]):
        inside = labels == comp
        cross = ones[inside[model.u[ones]] != inside[model.v[ones]]]
        t = len(cross)
        if t < 3 or t % 2 == 0:
            continue
        ends = np.concatenate([model.u[cross], model.v[cross]])
        if len(np.unique(ends)) != 2 * t:
            continue
        handle = np.flatnonzero(inside[model.u] & inside[model.v])
        pos = np.concatenate([handle, cross])
        rhs = int(inside.sum()) + (t - 1) // 2
        if x[pos].sum() > rhs + eps:
            rows.append((np.sort(pos), rhs))
    return rows


def _ceil(bound: float) -> float:
    return math.ceil(bound - BOUND_TOL) if np.isfinite(bound) else bound


def branch_and_cut(inst: Instance, cutoff: Optional[int] = None, *,
                   edge_mask: Optional[np.ndarray] = None,
                   eliminated: Iterable[Tour] = (),
                   initial_tours: Iterable[Tour] = (),
                   lower_bound: Optional[int] = None,
                   node_budget: int = DEFAULT_NODE_BUDGET,
                   time_budget: Optional[float] = None,
                   use_heuristic: bool = True,
                   root_rounds: int = 200, node_rounds: int = 25,
                   method: str = "highs") -> BranchAndCutResult:
    """Best-first branch-and-cut over the degree-2 LP with lazy subtour cuts.

    Only tours of length ``<= cutoff`` are sought when ``cutoff`` is given.
    ``edge_mask`` restricts the variables to a subset of the edges of K_n;
    ``eliminated`` tours are excluded with tour-elimination rows. When the
    incumbent reaches ``lower_bound`` the search stops early as proven.
    ``node_budget`` caps the number of LP solves.
    """
    if inst.n < 4:
        raise SizeError("branch_and_cut needs n >= 4")
    started = time.perf_counter()
    model = build_relaxation(inst, edge_mask)
    all_ids = np.flatnonzero(edge_mask) if edge_mask is not None else np.arange(inst.m)
    pos_of = {int(e): i for i, e in enumerate(all_ids)}

    banned: set[frozenset] = set()
    for t in eliminated:
        es = t.edge_set()
        banned.add(es)
        pos = [pos_of.get(edge_id(a, b, inst.n)) for a, b in es]
        if all(p is not None for p in pos):
            model.extra_rows.append((np.array(sorted(pos)), inst.n - 1))

    def admissible(t: Tour) -> bool:
        if t.edge_set() in banned:
            return False
        if any(edge_id(a, b, inst.n) not in pos_of for a, b in t.edges()):
            return False
        return cutoff is None or t.length <= cutoff

    incumbent: Optional[Tour] = None
    candidates = list(initial_tours)
    if use_heuristic and edge_mask is None:
        candidates.append(heuristic_tour(inst))
    for t in candidates:
        if admissible(t) and (incumbent is None or t.length < incumbent.length):
            incumbent = t

    def limit() -> float:
        if incumbent is not None:
            return incumbent.length - 1
        return cutoff if cutoff is not None else math.inf

    def done() -> bool:
        return incumbent is not None and lower_bound is not None and incumbent.length <= lower_bound

    lp = open_relaxation(model, method)
    lp_solves = 0
    nodes = 0
    root_bound = -math.inf
    root_info = None
    seq = itertools.count()
    heap = [BranchNode(-math.inf, next(seq))]
    exhausted = False
    seen_rows: set = set()
    blossoms = 0

    def fix_by_reduced_cost():
        if root_info is None or not np.isfinite(limit()):
            return
        z, x, rc = root_info
        mask = (x <= BOUND_TOL) & (rc > 0) & np.array([_ceil(z + r) > limit() for r in rc])
        model.upper[mask] = 0.0
        return int(mask.sum())

    while heap and not done():
        node = heapq.heappop(heap)
        if _ceil(node.bound) > limit():
            continue
        if lp_solves >= node_budget or (time_budget is not None and time.perf_counter() - started > time_budget):
            heapq.heappush(heap, node)
            exhausted = True
            break
        nodes += 1
        lower = model.lower.copy()
        upper = model.upper.copy()
        if node.fixed1:
            lower[list(node.fixed1)] = 1.0
        if node.fixed0:
            upper[list(node.fixed0)] = 0.0
        lp.set_bounds(lower, upper)
        is_root = node.depth == 0
        sol = None
        pruned = False
        for _ in range(root_rounds if is_root else node_rounds):
            sol = lp.solve()
            lp_solves += 1
            if sol.status == "infeasible" or _ceil(sol.objective) > limit():
                pruned = True
                break
            cuts = separate_subtours(sol)
            extra = 0
            if not cuts:
                tour = integral_tour_check(sol, inst)
                if tour is not None:
                    if admissible(tour) and (incumbent is None or tour.length < incumbent.length):
                        incumbent = tour
                        fix_by_reduced_cost()
                    pruned = True
                    break
                cut = _mincut_cut(sol.values, model)
                cuts = [cut] if cut is not None else []
                for pos, rhs in blossom_rows(sol.values, model):
                    key = (pos.tobytes(), rhs)
                    if key not in seen_rows:
                        seen_rows.add(key)
                        lp.add_row(pos, rhs)
                        extra += 1
            blossoms += extra
            if lp.add_cuts(cuts) + extra == 0:
                break
            if lp_solves >= node_budget:
                break
        if is_root:
            root_bound = sol.objective if sol is not None and sol.status != "infeasible" else math.inf
            if sol is not None and sol.status == "optimal" and not pruned:
                root_info = (sol.objective, sol.values.copy(), sol.reduced_costs.copy())
                fix_by_reduced_cost()
        if pruned:
            continue
        frac = np.abs(sol.values - 0.5)
        free = (upper - lower) > 0.5
        frac = np.where(free & (np.minimum(sol.values, 1 - sol.values) > 1e-6), frac, np.inf)
        j = int(np.argmin(frac))
        if not np.isfinite(frac[j]):
            # integral but not admissible (eliminated tour): branch on any free edge of the support
            ones = np.flatnonzero(free & (sol.values > 0.5))
            if ones.size == 0:
                continue
            j = int(ones[0])
        heapq.heappush(heap, BranchNode(sol.objective, next(seq), node.fixed0, node.fixed1 | {j}, node.depth + 1))
        heapq.heappush(heap, BranchNode(sol.objective, next(seq), node.fixed0 | {j}, node.fixed1, node.depth + 1))

    if done() or not heap:
        bound = incumbent.length if incumbent is not None else math.inf
        proven = True
    else:
        open_bound = min(nd.bound for nd in heap)
        bound = open_bound if incumbent is None else min(open_bound, incumbent.length)
        proven = not exhausted and incumbent is not None and _ceil(bound) >= incumbent.length
    return BranchAndCutResult(incumbent, proven, bound, root_bound, nodes, lp_solves, len(model.cuts) + blossoms)


# --------------------------------------------------------------------------- enumeration

@dataclass
class TourSet:
    tours: list
    optimal_length: int
    truncated: bool
    proven: bool = True

    def edge_union(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for t in self.tours:
            out |= t.edge_set()
        return out


def enumerate_optimal_tours(inst: Instance, cap: int = DEFAULT_TOUR_CAP, **kwargs) -> TourSet:
    """All optimal tours, found one at a time behind tour-elimination rows.

    ``truncated`` is set when ``cap`` tours were collected and a further
    optimal tour provably exists.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    first = branch_and_cut(inst, **kwargs)
    if first.tour is None:
        raise BudgetExhausted("no tour found within the budget")
    best = first.tour.length
    tours = [first.tour]
    proven = first.proven
    truncated = False
    while True:
        nxt = branch_and_cut(inst, cutoff=best, eliminated=tours, **kwargs)
        proven = proven and nxt.proven
        if nxt.tour is None or nxt.tour.length > best:
            break
        if len(tours) >= cap:
            truncated = True
            break
        tours.append(make_tour(canonical_order(nxt.tour.order), inst))
    tours[0] = make_tour(canonical_order(tours[0].order), inst)
    return TourSet(tours, best, truncated, proven)
