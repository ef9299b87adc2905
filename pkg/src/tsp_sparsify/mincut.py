"""Stoer-Wagner global minimum cut on a dense symmetric weight matrix."""
from __future__ import annotations

import numpy as np


def stoer_wagner(weights: np.ndarray) -> tuple[float, list[int]]:
    """Return ``(cut value, one shore)`` of a global minimum cut.

    ``weights`` must be symmetric and non-negative. A disconnected graph
    yields a cut of value 0.
    """
    w = np.array(weights, dtype=float)
    n = len(w)
    if n < 2:
        raise ValueError("a cut needs at least two vertices")
    np.fill_diagonal(w, 0.0)
    groups = [[i] for i in range(n)]
    active = np.ones(n, dtype=bool)
    best_value, best_shore = np.inf, []
    for _ in range(n - 1):
        idx = np.flatnonzero(active)
        added = np.zeros(n, dtype=bool)
        conn = np.zeros(n)
        prev = last = int(idx[0])
        added[last] = True
        conn += w[last]
        cut_value = 0.0
        for _ in range(len(idx) - 1):
            cand = np.where(active & ~added, conn, -np.inf)
            nxt = int(np.argmax(cand))
            cut_value = float(conn[nxt])
            added[nxt] = True
            conn += w[nxt]
            prev, last = last, nxt
        if cut_value < best_value:
            best_value, best_shore = cut_value, list(groups[last])
        # merge the last vertex of the phase into the one before it
        w[prev] += w[last]
        w[:, prev] += w[:, last]
        w[prev, prev] = 0.0
        w[last] = 0.0
        w[:, last] = 0.0
        active[last] = False
        groups[prev].extend(groups[last])
    return best_value, sorted(best_shore)
