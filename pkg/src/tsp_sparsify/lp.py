"""Symmetric TSP LP relaxation, subtour cuts and reduced-cost features."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import highspy
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .graph import Tour, make_tour
from .simplex import bounded_simplex
from .tsplib import Instance, edge_endpoints

SUPPORT_EPS = 1e-6
INTEGRALITY_TOL = 1e-6
DEGENERATE_MAX = 1e-12


class SolverError(RuntimeError):
    pass


def default_k(n: int) -> int:
    """ceil(log2(n)), the shared default for cut rounds, perturbed copies and MST levels."""
    return max(1, math.ceil(math.log2(n)))


@dataclass(frozen=True)
class SubtourCut:
    """x(E(W)) <= |W| - 1 for the vertex set W."""

    vertices: frozenset

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(int(x) for x in self.vertices))
        if len(self.vertices) < 3:
            raise ValueError("subtour cuts need at least 3 vertices")

    @property
    def rhs(self) -> int:
        return len(self.vertices) - 1


@dataclass
class LpModel:
    """One variable per edge in ``u``/``v``, degree-2 rows, and <= rows for cuts.

    ``extra_rows`` holds arbitrary ``(variable positions, rhs)`` <= rows, e.g.
    tour-elimination constraints.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    cost: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    cuts: list = field(default_factory=list)
    extra_rows: list = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.u)

    def degree_matrix(self) -> sparse.csr_matrix:
        m = self.num_vars
        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([np.arange(m), np.arange(m)])
        return sparse.csr_matrix((np.ones(2 * m), (rows, cols)), shape=(self.n, m))

    def cut_positions(self, cut: SubtourCut) -> np.ndarray:
        inside = np.zeros(self.n, dtype=bool)
        inside[list(cut.vertices)] = True
        return np.flatnonzero(inside[self.u] & inside[self.v])

    def inequality_rows(self) -> tuple[Optional[sparse.csr_matrix], np.ndarray]:
        rows = [(self.cut_positions(c), c.rhs) for c in self.cuts] + list(self.extra_rows)
        if not rows:
            return None, np.zeros(0)
        data_r, data_c, rhs = [], [], []
        for i, (pos, r) in enumerate(rows):
            data_r.append(np.full(len(pos), i))
            data_c.append(np.asarray(pos))
            rhs.append(r)
        rr = np.concatenate(data_r)
        A = sparse.csr_matrix((np.ones(len(rr)), (rr, np.concatenate(data_c))),
                              shape=(len(rows), self.num_vars))
        return A, np.asarray(rhs, dtype=float)

    def add_cuts(self, cuts: Sequence[SubtourCut]) -> int:
        known = set(self.cuts)
        new = [c for c in cuts if c not in known]
        self.cuts.extend(new)
        return len(new)

    def copy(self) -> "LpModel":
        return LpModel(self.n, self.u, self.v, self.cost.copy(), self.lower.copy(), self.upper.copy(),
                       list(self.cuts), list(self.extra_rows))


@dataclass
class LpSolution:
    values: np.ndarray
    reduced_costs: np.ndarray
    objective: float
    status: str
    n: int
    u: np.ndarray
    v: np.ndarray
    row_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))


def build_relaxation(inst: Instance, edge_mask: Optional[np.ndarray] = None) -> LpModel:
    """Degree-2 relaxation over all edges, or over the edges selected by ``edge_mask``."""
    iu, ju = edge_endpoints(inst.n)
    w = inst.weights[iu, ju].astype(float)
    if edge_mask is not None:
        keep = np.flatnonzero(edge_mask)
        iu, ju, w = iu[keep], ju[keep], w[keep]
    m = len(iu)
    return LpModel(inst.n, iu.astype(np.int64), ju.astype(np.int64), w, np.zeros(m), np.ones(m))


class HighsRelaxation:
    """A model loaded into a persistent HiGHS instance for warm-started re-solves.

    Rows and bound changes go through this object so the model and the
    solver stay in sync.
    """

    def __init__(self, model: LpModel):
        self.model = model
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        m = model.num_vars
        self._lower = model.lower.copy()
        self._upper = model.upper.copy()
        h.addVars(m, self._lower, self._upper)
        h.changeColsCost(m, np.arange(m, dtype=np.int32), model.cost.astype(float))
        A = model.degree_matrix().tocsr()
        h.addRows(model.n, np.full(model.n, 2.0), np.full(model.n, 2.0), A.nnz,
                  A.indptr[:-1].astype(np.int32), A.indices.astype(np.int32), A.data)
        self.h = h
        self._rows = 0
        self._push_rows([(model.cut_positions(c), c.rhs) for c in model.cuts] + list(model.extra_rows))

    def _push_rows(self, rows):
        for pos, rhs in rows:
            pos = np.asarray(pos, dtype=np.int32)
            self.h.addRow(-highspy.kHighsInf, float(rhs), len(pos), pos, np.ones(len(pos)))
            self._rows += 1

    def add_cuts(self, cuts: Sequence[SubtourCut]) -> int:
        known = set(self.model.cuts)
        new = []
        for c in cuts:
            if c not in known:
                known.add(c)
                new.append(c)
        self.model.cuts.extend(new)
        self._push_rows([(self.model.cut_positions(c), c.rhs) for c in new])
        return len(new)

    def add_row(self, positions, rhs: float):
        self.model.extra_rows.append((np.asarray(positions), rhs))
        self._push_rows([(positions, rhs)])

    def set_bounds(self, lower: np.ndarray, upper: np.ndarray):
        changed = np.flatnonzero((lower != self._lower) | (upper != self._upper)).astype(np.int32)
        if changed.size:
            self.h.changeColsBounds(len(changed), changed, lower[changed], upper[changed])
            self._lower[changed] = lower[changed]
            self._upper[changed] = upper[changed]

    def set_costs(self, cost: np.ndarray):
        m = self.model.num_vars
        self.h.changeColsCost(m, np.arange(m, dtype=np.int32), np.asarray(cost, dtype=float))

    def solve(self) -> LpSolution:
        model = self.model
        m = model.num_vars
        if np.any(self._lower > self._upper):
            return LpSolution(np.zeros(m), np.zeros(m), np.inf, "infeasible", model.n, model.u, model.v)
        self.h.run()
        status = self.h.getModelStatus()
        if status in (highspy.HighsModelStatus.kInfeasible, highspy.HighsModelStatus.kUnboundedOrInfeasible):
            return LpSolution(np.zeros(m), np.zeros(m), np.inf, "infeasible", model.n, model.u, model.v)
        if status == highspy.HighsModelStatus.kOptimal:
            label = "optimal"
        elif status == highspy.HighsModelStatus.kIterationLimit:
            label = "iteration-limit"
        else:
            raise SolverError(f"LP solver failed with status {self.h.modelStatusToString(status)}")
        sol = self.h.getSolution()
        x = np.clip(np.asarray(sol.col_value), 0.0, 1.0)
        return LpSolution(x, np.asarray(sol.col_dual), float(self.h.getInfo().objective_function_value),
                          label, model.n, model.u, model.v, np.asarray(sol.row_dual))


class DenseRelaxation:
    """Same interface as :class:`HighsRelaxation`, re-solving from scratch with the dense simplex."""

    def __init__(self, model: LpModel):
        self.model = model

    def add_cuts(self, cuts: Sequence[SubtourCut]) -> int:
        return self.model.add_cuts(cuts)

    def add_row(self, positions, rhs: float):
        self.model.extra_rows.append((np.asarray(positions), rhs))

    def set_bounds(self, lower: np.ndarray, upper: np.ndarray):
        self.model.lower = lower.copy()
        self.model.upper = upper.copy()

    def set_costs(self, cost: np.ndarray):
        self.model.cost = np.asarray(cost, dtype=float)

    def solve(self) -> LpSolution:
        return solve_lp(self.model, "simplex")


def open_relaxation(model: LpModel, method: str = "highs"):
    if method == "highs":
        return HighsRelaxation(model)
    if method == "simplex":
        return DenseRelaxation(model)
    raise ValueError(f"unknown LP method {method!r}")


def solve_lp(model: LpModel, method: str = "highs") -> LpSolution:
    """Solve the model; ``method`` is ``"highs"`` (HiGHS simplex) or ``"simplex"`` (dense primal)."""
    if method == "highs":
        return HighsRelaxation(model).solve()
    if method != "simplex":
        raise ValueError(f"unknown LP method {method!r}")
    if np.any(model.lower > model.upper):
        m = model.num_vars
        return LpSolution(np.zeros(m), np.zeros(m), np.inf, "infeasible", model.n, model.u, model.v)
    A_ub, b_ub = model.inequality_rows()
    return _solve_dense(model, model.degree_matrix(), np.full(model.n, 2.0), A_ub, b_ub)


def _solve_dense(model, A_eq, b_eq, A_ub, b_ub) -> LpSolution:
    m = model.num_vars
    A = A_eq.toarray()
    b = b_eq
    lo, hi, c = model.lower, model.upper, model.cost
    k = 0
    if A_ub is not None:
        k = A_ub.shape[0]
        A = np.vstack([np.hstack([A, np.zeros((model.n, k))]), np.hstack([A_ub.toarray(), np.eye(k)])])
        b = np.concatenate([b_eq, b_ub])
        lo = np.concatenate([lo, np.zeros(k)])
        hi = np.concatenate([hi, np.full(k, np.inf)])
        c = np.concatenate([c, np.zeros(k)])
    res = bounded_simplex(c, A, b, lo, hi)
    if res.status == "infeasible":
        return LpSolution(np.zeros(m), np.zeros(m), np.inf, "infeasible", model.n, model.u, model.v)
    if res.status == "unbounded":
        raise SolverError("bounded model reported unbounded")
    x = np.clip(res.x[:m], 0.0, 1.0)
    return LpSolution(x, res.reduced_costs[:m], float(model.cost @ res.x[:m]), res.status,
                      model.n, model.u, model.v, res.y)


def support_components(sol: LpSolution, eps: float = SUPPORT_EPS) -> tuple[int, np.ndarray]:
    keep = sol.values >= eps
    g = sparse.coo_matrix((np.ones(int(keep.sum())), (sol.u[keep], sol.v[keep])), shape=(sol.n, sol.n))
    return connected_components(g, directed=False)


def separate_subtours(sol: LpSolution, eps: float = SUPPORT_EPS) -> list[SubtourCut]:
    """One cut per connected component of the support graph, if it is disconnected."""
    count, labels = support_components(sol, eps)
    if count <= 1:
        return []
    cuts = []
    for c in range(count):
        members = np.flatnonzero(labels == c)
        if len(members) >= 3:
            cuts.append(SubtourCut(frozenset(members.tolist())))
    return cuts


def normalize_reduced_costs(rc: np.ndarray) -> np.ndarray:
    top = float(np.max(rc)) if len(rc) else 0.0
    if top <= DEGENERATE_MAX:
        return np.zeros_like(rc, dtype=float)
    return rc / top


@dataclass
class CuttingPlaneResult:
    solution: LpSolution
    rounds: int
    r_hat: np.ndarray
    objectives: list
    root: LpSolution
    model: LpModel


def _checked(sol: LpSolution) -> LpSolution:
    if sol.status != "optimal":
        raise SolverError(f"relaxation solve ended with status {sol.status}")
    return sol


def cutting_plane_features(inst: Instance, max_rounds: int, method: str = "highs",
                           eps: float = SUPPORT_EPS) -> CuttingPlaneResult:
    """Root relaxation plus up to ``max_rounds`` rounds of component subtour cuts."""
    if max_rounds < 0:
        raise ValueError("max_rounds must be non-negative")
    model = build_relaxation(inst)
    lp = open_relaxation(model, method)
    sol = root = _checked(lp.solve())
    objectives = [sol.objective]
    rounds = 0
    while rounds < max_rounds:
        cuts = separate_subtours(sol, eps)
        if not cuts or lp.add_cuts(cuts) == 0:
            break
        sol = _checked(lp.solve())
        objectives.append(sol.objective)
        rounds += 1
    return CuttingPlaneResult(sol, rounds, normalize_reduced_costs(sol.reduced_costs), objectives, root, model)


def perturbed_reduced_cost_copies(inst: Instance, copies: int, seed: int, magnitude: float = 0.1,
                                  method: str = "highs") -> np.ndarray:
    """Normalized reduced costs of ``copies`` objective-perturbed re-solves, one row per copy.

    The perturbed problems start from the root relaxation strengthened by one
    round of component subtour cuts. Each coefficient is scaled by an
    independent factor drawn uniformly from [1 - magnitude, 1 + magnitude].
    """
    if copies < 1:
        raise ValueError("copies must be at least 1")
    model = build_relaxation(inst)
    lp = open_relaxation(model, method)
    lp.add_cuts(separate_subtours(_checked(lp.solve())))
    rng = np.random.default_rng(seed)
    factors = rng.uniform(1.0 - magnitude, 1.0 + magnitude, size=(copies, model.num_vars))
    base = model.cost.copy()
    out = np.empty((copies, model.num_vars))
    for i in range(copies):
        lp.set_costs(base * factors[i])
        out[i] = normalize_reduced_costs(_checked(lp.solve()).reduced_costs)
    lp.set_costs(base)
    return out


def perturbed_mean_reduced_costs(inst: Instance, copies: int, seed: int, magnitude: float = 0.1,
                                 method: str = "highs") -> np.ndarray:
    return perturbed_reduced_cost_copies(inst, copies, seed, magnitude, method).mean(axis=0)


def integral_tour_check(sol: LpSolution, inst: Instance, tol: float = INTEGRALITY_TOL) -> Optional[Tour]:
    """The tour encoded by an integral Hamiltonian LP solution, else None."""
    x = sol.values
    if np.any(np.minimum(np.abs(x), np.abs(1.0 - x)) > tol):
        return None
    ones = x > 0.5
    if int(ones.sum()) != inst.n:
        return None
    adj: list[list[int]] = [[] for _ in range(inst.n)]
    for a, b in zip(sol.u[ones].tolist(), sol.v[ones].tolist()):
        adj[a].append(b)
        adj[b].append(a)
    if any(len(nb) != 2 for nb in adj):
        return None
    order, prev, cur = [0], -1, 0
    while True:
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        if nxt == 0:
            break
        order.append(nxt)
        prev, cur = cur, nxt
    if len(order) != inst.n:
        return None
    return make_tour(order, inst)
