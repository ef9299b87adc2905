"""Spanning trees, successive MST extraction, tours and the double-tree heuristic."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .tsplib import Instance, edge_endpoints


class ConnectivityError(ValueError):
    pass


class TourError(ValueError):
    pass


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph stored as parallel edge arrays with u < v."""

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.int64)
        v = np.asarray(self.v, dtype=np.int64)
        w = np.asarray(self.w, dtype=np.int64)
        if not (u.shape == v.shape == w.shape):
            raise ValueError("edge arrays must have equal length")
        if (u == v).any():
            raise ValueError("self-loops are not allowed")
        if (w < 0).any():
            raise ValueError("weights must be non-negative")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        if len(set(zip(lo.tolist(), hi.tolist()))) != len(lo):
            raise ValueError("duplicate edges")
        object.__setattr__(self, "u", lo)
        object.__setattr__(self, "v", hi)
        object.__setattr__(self, "w", w)

    @classmethod
    def complete(cls, inst: Instance) -> "WeightedGraph":
        iu, ju = edge_endpoints(inst.n)
        return cls(inst.n, iu, ju, inst.weights[iu, ju])

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]]) -> "WeightedGraph":
        e = np.array(list(edges), dtype=np.int64).reshape(-1, 3)
        return cls(n, e[:, 0], e[:, 1], e[:, 2])

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))


def _kruskal(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Positions (into u/v/w) of the MST edges; ties broken by (weight, u, v)."""
    order = np.lexsort((v, u, w))
    uf = UnionFind(n)
    chosen = []
    for idx in order.tolist():
        if uf.union(int(u[idx]), int(v[idx])):
            chosen.append(idx)
            if len(chosen) == n - 1:
                break
    if len(chosen) != n - 1:
        raise ConnectivityError("graph is not connected")
    return np.array(chosen, dtype=np.int64)


def minimum_spanning_tree(g: WeightedGraph) -> list[tuple[int, int]]:
    """Edges (u < v) of the deterministic minimum spanning tree, sorted."""
    if g.n == 1:
        return []
    idx = _kruskal(g.n, g.u, g.v, g.w)
    return sorted(zip(g.u[idx].tolist(), g.v[idx].tolist()))


def tree_weight(g: WeightedGraph, tree: Iterable[tuple[int, int]]) -> int:
    lookup = {(a, b): c for a, b, c in zip(g.u.tolist(), g.v.tolist(), g.w.tolist())}
    return sum(lookup[(min(a, b), max(a, b))] for a, b in tree)


@dataclass
class MstExtraction:
    levels: dict[tuple[int, int], int]
    k_max: int

    def level_edges(self, j: int) -> list[tuple[int, int]]:
        return sorted(e for e, lvl in self.levels.items() if lvl == j)


class PartialExtractionError(ConnectivityError):
    def __init__(self, extraction: MstExtraction, requested: int):
        super().__init__(f"residual graph disconnected after {extraction.k_max} of {requested} MST levels")
        self.extraction = extraction


def successive_mst_extract(g: WeightedGraph, k: int) -> MstExtraction:
    """Repeatedly take the MST of what is left of ``g`` and remove it, ``k`` times."""
    if k < 1:
        raise ValueError("k must be at least 1")
    alive = np.ones(len(g.u), dtype=bool)
    levels: dict[tuple[int, int], int] = {}
    for j in range(1, k + 1):
        pos = np.flatnonzero(alive)
        try:
            chosen = pos[_kruskal(g.n, g.u[pos], g.v[pos], g.w[pos])]
        except ConnectivityError:
            raise PartialExtractionError(MstExtraction(levels, j - 1), k) from None
        alive[chosen] = False
        for a, b in zip(g.u[chosen].tolist(), g.v[chosen].tolist()):
            levels[(a, b)] = j
    return MstExtraction(levels, k)


# --------------------------------------------------------------------------- tours

@dataclass(frozen=True)
class Tour:
    order: tuple[int, ...]
    length: int

    def edges(self) -> list[tuple[int, int]]:
        o = self.order
        return [(min(a, b), max(a, b)) for a, b in zip(o, o[1:] + o[:1])]

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges())


def validate_order(order: Sequence[int], n: int) -> tuple[int, ...]:
    order = tuple(int(x) for x in order)
    if len(order) != n or set(order) != set(range(n)):
        raise TourError(f"sequence is not a permutation of 0..{n - 1}: {order}")
    return order


def tour_length(order: Sequence[int], inst: Instance) -> int:
    order = validate_order(order, inst.n)
    a = np.array(order)
    return int(inst.weights[a, np.roll(a, -1)].sum())


def make_tour(order: Sequence[int], inst: Instance) -> Tour:
    order = validate_order(order, inst.n)
    return Tour(order, tour_length(order, inst))


def canonical_order(order: Sequence[int]) -> tuple[int, ...]:
    """Rotate to start at vertex 0 and pick the direction with the smaller second vertex."""
    o = list(order)
    i = o.index(0)
    o = o[i:] + o[:i]
    if len(o) > 2 and o[-1] < o[1]:
        o = [o[0]] + o[:0:-1]
    return tuple(o)


def _preorder(adj: list[list[int]], root: int, reverse: bool) -> list[int]:
    out, stack, seen = [], [root], set()
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        out.append(x)
        kids = sorted(y for y in adj[x] if y not in seen)
        # the stack pops last-in first, so push in the opposite of visit order
        stack.extend(kids if reverse else kids[::-1])
    return out


def double_tree_tours(inst: Instance) -> tuple[Tour, Tour]:
    """Two double-tree tours: children visited in ascending and in descending index.

    Both are pre-order walks of the MST rooted at vertex 0, so each is at most
    twice the MST weight on metric instances.
    """
    if inst.n < 3:
        raise ValueError("double-tree tours need at least 3 vertices")
    adj: list[list[int]] = [[] for _ in range(inst.n)]
    for a, b in minimum_spanning_tree(WeightedGraph.complete(inst)):
        adj[a].append(b)
        adj[b].append(a)
    forward = make_tour(_preorder(adj, 0, reverse=False), inst)
    backward = make_tour(_preorder(adj, 0, reverse=True), inst)
    return forward, backward


# --------------------------------------------------------------------------- local search

def _two_opt_pass(t: np.ndarray, w: np.ndarray) -> bool:
    n = len(t)
    improved = False
    for i in range(n - 2):
        a, b = t[i], t[i + 1]
        j = np.arange(i + 2, n if i > 0 else n - 1)
        if j.size == 0:
            continue
        c = t[j]
        d = t[(j + 1) % n]
        delta = w[a, c] + w[b, d] - w[a, b] - w[c, d]
        best = int(np.argmin(delta))
        if delta[best] < 0:
            jj = int(j[best])
            t[i + 1:jj + 1] = t[i + 1:jj + 1][::-1].copy()
            improved = True
    return improved


def _or_opt_pass(t: np.ndarray, w: np.ndarray) -> bool:
    n = len(t)
    for seg in (1, 2, 3):
        if n < seg + 3:
            continue
        for i in range(n):
            s = np.roll(t, -i)  # segment occupies s[0:seg]
            p, first, last, q = s[-1], s[0], s[seg - 1], s[seg]
            gain = w[p, first] + w[last, q] - w[p, q]
            rest = s[seg:]
            x, y = rest[:-1], rest[1:]
            keep = w[x, first] + w[last, y] - w[x, y]
            flip = w[x, last] + w[first, y] - w[x, y]
            cand = np.minimum(keep, flip)
            k = int(np.argmin(cand))
            if cand[k] < gain:
                piece = s[:seg] if keep[k] <= flip[k] else s[:seg][::-1]
                t[:] = np.concatenate([rest[:k + 1], piece, rest[k + 1:]])
                return True
    return False


def improve_tour(tour: Tour, inst: Instance, max_passes: int = 1000) -> Tour:
    """2-opt plus Or-opt descent; never returns a longer tour."""
    if inst.n < 5:
        return tour
    w = np.asarray(inst.weights)
    t = np.array(tour.order)
    for _ in range(max_passes):
        if not (_two_opt_pass(t, w) or _or_opt_pass(t, w)):
            break
    better = make_tour(t.tolist(), inst)
    return better if better.length < tour.length else tour


def nearest_neighbour_tour(inst: Instance, start: int = 0) -> Tour:
    w = inst.weights
    left = np.ones(inst.n, dtype=bool)
    order = [start]
    left[start] = False
    for _ in range(inst.n - 1):
        row = np.where(left, w[order[-1]], np.iinfo(np.int64).max)
        nxt = int(np.argmin(row))
        order.append(nxt)
        left[nxt] = False
    return make_tour(order, inst)


def heuristic_tour(inst: Instance, starts: Optional[int] = None) -> Tour:
    """Best locally optimal tour from double-tree and nearest-neighbour starts."""
    seeds = list(double_tree_tours(inst)) if inst.n >= 3 else []
    for s in range(min(inst.n, starts if starts is not None else 3)):
        seeds.append(nearest_neighbour_tour(inst, s * max(1, inst.n // 3) % inst.n))
    best = None
    for t in seeds:
        t = improve_tour(t, inst)
        if best is None or t.length < best.length:
            best = t
    return best
