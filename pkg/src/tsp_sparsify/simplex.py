"""Dense bounded-variable primal simplex.

Solves ``min c@x  s.t.  A@x = b,  lo <= x <= hi`` with finite lower bounds.
It is slow next to HiGHS and meant for small models and for cross-checking;
its reduced costs come straight out of the pricing step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SimplexError(RuntimeError):
    pass


@dataclass
class SimplexResult:
    x: np.ndarray
    y: np.ndarray
    reduced_costs: np.ndarray
    objective: float
    status: str
    iterations: int


def _iterate(A, b, c, lo, hi, x, basis, max_iter, tol, bland_after):
    m, nv = A.shape
    in_basis = np.zeros(nv, dtype=bool)
    in_basis[basis] = True
    degenerate = 0
    it = 0
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    dtol = tol * scale
    while True:
        B = A[:, basis]
        try:
            xN_contrib = A[:, ~in_basis] @ x[~in_basis]
            x[basis] = np.linalg.solve(B, b - xN_contrib)
            y = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError:
            raise SimplexError("singular basis") from None
        d = c - A.T @ y
        if it >= max_iter:
            return y, d, "iteration-limit", it
        movable = (~in_basis) & (hi - lo > tol)
        at_lo = movable & (x <= lo + tol)
        at_hi = movable & (x >= hi - tol)
        score = np.zeros(nv)
        score[at_lo] = np.maximum(-d[at_lo], 0.0)
        score[at_hi] = np.maximum(d[at_hi], 0.0)
        cand = np.flatnonzero(score > dtol)
        if cand.size == 0:
            return y, d, "optimal", it
        if degenerate >= bland_after:
            j = int(cand[0])
        else:
            j = int(cand[np.argmax(score[cand])])
        direction = 1.0 if at_lo[j] else -1.0
        alpha = np.linalg.solve(B, A[:, j])
        step = direction * alpha  # x_B moves by -t * step
        xb = x[basis]
        lb, ub = lo[basis], hi[basis]
        limits = np.full(m, np.inf)
        dec = step > tol
        inc = step < -tol
        limits[dec] = (xb[dec] - lb[dec]) / step[dec]
        limits[inc] = (ub[inc] - xb[inc]) / -step[inc]
        limits = np.maximum(limits, 0.0)
        t_flip = hi[j] - lo[j]
        t_row = limits.min() if m else np.inf
        if not np.isfinite(min(t_row, t_flip)):
            return y, d, "unbounded", it
        it += 1
        if t_flip <= t_row:
            x[j] = hi[j] if direction > 0 else lo[j]
            degenerate = 0
            continue
        ties = np.flatnonzero(limits <= t_row + tol)
        r = int(ties[np.argmin(np.asarray(basis)[ties])]) if degenerate >= bland_after else int(ties[0])
        degenerate = degenerate + 1 if t_row <= tol else 0
        x[basis] = xb - t_row * step
        x[j] = x[j] + direction * t_row
        leaving = basis[r]
        x[leaving] = lo[leaving] if step[r] > 0 else hi[leaving]
        in_basis[leaving] = False
        in_basis[j] = True
        basis[r] = j


def bounded_simplex(c, A, b, lo, hi, *, max_iter: int = 50_000, tol: float = 1e-9,
                    bland_after: int = 50) -> SimplexResult:
    """Two-phase bounded-variable primal simplex with Dantzig pricing.

    Falls back to Bland's rule after ``bland_after`` consecutive degenerate
    pivots. ``hi`` may contain ``inf``; ``lo`` must be finite.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m, nv = A.shape
    if not np.all(np.isfinite(lo)):
        raise SimplexError("lower bounds must be finite")
    if np.any(hi < lo - tol):
        return SimplexResult(lo.copy(), np.zeros(m), np.zeros(nv), np.inf, "infeasible", 0)

    x = lo.copy()
    resid = b - A @ x
    sign = np.where(resid >= 0, 1.0, -1.0)
    A1 = np.hstack([A, np.diag(sign)])
    lo1 = np.concatenate([lo, np.zeros(m)])
    hi1 = np.concatenate([hi, np.full(m, np.inf)])
    x1 = np.concatenate([x, np.abs(resid)])
    basis = list(range(nv, nv + m))
    c1 = np.concatenate([np.zeros(nv), np.ones(m)])
    _, _, status, it1 = _iterate(A1, b, c1, lo1, hi1, x1, basis, max_iter, tol, bland_after)
    if status != "optimal":
        return SimplexResult(x1[:nv], np.zeros(m), np.zeros(nv), np.nan, status, it1)
    infeas = float(x1[nv:].sum())
    if infeas > 1e-7 * max(1.0, float(np.abs(b).max(initial=0.0))):
        return SimplexResult(x1[:nv], np.zeros(m), np.zeros(nv), np.inf, "infeasible", it1)

    # artificials are pinned at zero for phase two; basic ones stay as degenerate placeholders
    hi1[nv:] = 0.0
    x1[nv:] = 0.0
    c2 = np.concatenate([c, np.zeros(m)])
    y, d, status, it2 = _iterate(A1, b, c2, lo1, hi1, x1, basis, max_iter - it1, tol, bland_after)
    xs = x1[:nv]
    return SimplexResult(xs, y, d[:nv], float(c @ xs), status, it1 + it2)
