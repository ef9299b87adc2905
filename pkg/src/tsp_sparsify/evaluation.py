"""Optimality-ratio and pruning-rate evaluation of sparsified instances."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .exact import DEFAULT_NODE_BUDGET, branch_and_cut
from .graph import Tour
from .sparsifier import contains_tour
from .tsplib import Instance, SparsifiedInstance

INFINITY_MARKER = "∞"
DEFAULT_BOUNDS = (1.0, 1.02, 1.05)
TIGHT_BOUNDS = (1.0, 1.005, 1.010)


@dataclass
class EvaluationReport:
    name: str
    n: int
    m: int
    m_hat: int
    pruning_rate: float
    feasible: bool
    feasibility: str            # feasible | infeasible | unknown
    opt_length: Optional[int]
    pruned_length: Optional[int]
    optimality_ratio: float     # inf when no tour is known in the pruned graph
    solver_proven: bool
    group: str = ""
    lp_solves: int = 0
    seconds: Optional[float] = None

    @property
    def retention_rate(self) -> float:
        return self.m_hat / self.m


def evaluate_instance(inst: Instance, s: SparsifiedInstance, budget: int = DEFAULT_NODE_BUDGET, *,
                      reference: Optional[Tour] = None, reference_proven: bool = True,
                      known_tours: Sequence[Tour] = (), group: str = "",
                      timing: bool = False) -> EvaluationReport:
    """Solve the original and the pruned instance and compare optimal lengths.

    ``reference`` may supply an already-proven optimal tour of ``inst``.
    ``known_tours`` (e.g. inserted tours) seed the pruned search as incumbents.
    """
    if s.base.n != inst.n or not np.array_equal(s.base.weights, inst.weights):
        raise ValueError("sparsified instance does not derive from this instance")
    started = time.perf_counter()
    lp_solves = 0
    if reference is None:
        res = branch_and_cut(inst, node_budget=budget)
        reference, reference_proven = res.tour, res.proven
        lp_solves += res.lp_solves
    if reference is None:
        raise RuntimeError("no tour found for the original instance within the budget")
    opt = reference.length

    if contains_tour(s, reference):
        pruned_len, feasibility, proven = opt, "feasible", reference_proven
    else:
        usable = [t for t in known_tours if contains_tour(s, t)]
        res = branch_and_cut(inst, edge_mask=s.retained, initial_tours=usable, lower_bound=opt,
                             node_budget=budget)
        lp_solves += res.lp_solves
        proven = reference_proven and res.proven
        if res.tour is not None:
            pruned_len, feasibility = res.tour.length, "feasible"
        else:
            pruned_len = None
            feasibility = "infeasible" if res.proven else "unknown"
    ratio = pruned_len / opt if pruned_len is not None else math.inf
    if pruned_len is not None and opt == 0:
        ratio = 1.0
    return EvaluationReport(inst.name, inst.n, inst.m, s.m_hat, 1.0 - s.m_hat / inst.m,
                            feasibility == "feasible", feasibility, opt, pruned_len, ratio, proven,
                            group, lp_solves, time.perf_counter() - started if timing else None)


# --------------------------------------------------------------------------- CSV

_REPORT_FIELDS = [f.name for f in fields(EvaluationReport)]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return INFINITY_MARKER if math.isinf(value) else f"{value:.12g}"
    return str(value)


def reports_to_csv(reports: Iterable[EvaluationReport], timing: bool = False) -> str:
    cols = [c for c in _REPORT_FIELDS if timing or c != "seconds"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in reports:
        w.writerow([_fmt(getattr(r, c)) for c in cols])
    return buf.getvalue()


def reports_from_csv(text: str) -> list[EvaluationReport]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        def num(key, kind):
            v = row.get(key, "")
            if v in ("", None):
                return None
            if v == INFINITY_MARKER:
                return math.inf
            return kind(v)
        out.append(EvaluationReport(
            name=row["name"], n=int(row["n"]), m=int(row["m"]), m_hat=int(row["m_hat"]),
            pruning_rate=float(row["pruning_rate"]), feasible=row["feasible"] == "1",
            feasibility=row["feasibility"], opt_length=num("opt_length", int),
            pruned_length=num("pruned_length", int), optimality_ratio=num("optimality_ratio", float),
            solver_proven=row["solver_proven"] == "1", group=row.get("group", ""),
            lp_solves=int(row.get("lp_solves") or 0), seconds=num("seconds", float)))
    return out


# --------------------------------------------------------------------------- summaries

def _bound_label(b: float) -> str:
    return "ratio_eq_1" if b == 1.0 else f"ratio_lt_{b:g}"


def aggregate_summary(reports: Sequence[EvaluationReport], bounds: Sequence[float] = DEFAULT_BOUNDS) -> list[dict]:
    """Per-group means, worst case and ratio-bound counts, in first-seen group order."""
    if not reports:
        raise ValueError("no reports to summarize")
    groups: dict[str, list[EvaluationReport]] = {}
    for r in reports:
        groups.setdefault(r.group, []).append(r)
    rows = []
    for g, rs in groups.items():
        ratios = np.array([r.optimality_ratio for r in rs], dtype=float)
        finite = ratios[np.isfinite(ratios)]
        row = {
            "group": g,
            "instances": len(rs),
            "mean_pruning_rate": float(np.mean([r.pruning_rate for r in rs])),
            "mean_ratio": float(finite.mean()) if finite.size else math.inf,
            "max_ratio": math.inf if finite.size < len(rs) else float(finite.max()),
        }
        for b in bounds:
            hit = np.isclose(finite, 1.0, rtol=0, atol=1e-12) if b == 1.0 else finite < b
            row[_bound_label(b)] = int(hit.sum())
        row["infeasible"] = sum(r.feasibility == "infeasible" for r in rs)
        row["unknown"] = sum(r.feasibility == "unknown" for r in rs)
        rows.append(row)
    return rows


def summary_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for row in rows:
        w.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def summary_to_text(rows: Sequence[dict]) -> str:
    cols = list(rows[0])
    cells = [[_fmt(round(v, 4) if isinstance(v, float) and math.isfinite(v) else v) for v in r.values()]
             for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(cols, widths))]
    lines += ["  ".join(x.ljust(wd) for x, wd in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def plot_rows(reports: Sequence[EvaluationReport]) -> str:
    """Plot-ready CSV: pruning rate against optimality ratio, and n against pruning rate."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "group", "n", "pruning_rate", "optimality_ratio"])
    for r in reports:
        w.writerow([r.name, r.group, r.n, _fmt(r.pruning_rate), _fmt(r.optimality_ratio)])
    return buf.getvalue()
