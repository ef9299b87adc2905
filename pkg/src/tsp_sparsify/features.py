"""Per-edge feature vectors and supervision labels."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exact import TourSet
from .graph import PartialExtractionError, WeightedGraph, successive_mst_extract
from .lp import cutting_plane_features, default_k, integral_tour_check, perturbed_mean_reduced_costs
from .tsplib import Instance, edge_endpoints, edge_id

log = logging.getLogger(__name__)

FEATURE_NAMES = ("q_a", "q_b", "q_c", "q_d", "q_e", "q_f", "r_hat", "r_tilde", "q_mst")
LP_VALUE_NAMES = ("x_root", "x_cut")


class LabelingError(ValueError):
    pass


@dataclass
class FeatureConfig:
    """Iteration counts default to ceil(log2 n) when left as None."""

    k_rounds: Optional[int] = None
    copies: Optional[int] = None
    mst_k: Optional[int] = None
    seed: int = 0
    perturbation: float = 0.1
    include_lp_values: bool = False
    method: str = "highs"

    def resolved(self, n: int) -> "FeatureConfig":
        k = default_k(n)
        return FeatureConfig(k if self.k_rounds is None else self.k_rounds,
                             k if self.copies is None else self.copies,
                             k if self.mst_k is None else self.mst_k,
                             self.seed, self.perturbation, self.include_lp_values, self.method)


@dataclass
class FeatureMatrix:
    u: np.ndarray
    v: np.ndarray
    values: np.ndarray
    names: tuple = FEATURE_NAMES
    labels: Optional[np.ndarray] = None
    sample_weight: Optional[np.ndarray] = None
    solved_at_root: bool = False
    name: str = ""

    def __len__(self):
        return len(self.u)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["u", "v", *self.names]
        if self.labels is not None:
            header.append("label")
        if self.sample_weight is not None:
            header.append("sample_weight")
        writer.writerow(header)
        for i in range(len(self.u)):
            row = [int(self.u[i]) + 1, int(self.v[i]) + 1] + [f"{x:.12g}" for x in self.values[i]]
            if self.labels is not None:
                row.append(int(self.labels[i]))
            if self.sample_weight is not None:
                row.append(f"{self.sample_weight[i]:.12g}")
            writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, name: str = "") -> "FeatureMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        if header[:2] != ["u", "v"]:
            raise ValueError("feature CSV must start with u,v columns")
        extra = [h for h in ("label", "sample_weight") if h in header]
        names = tuple(h for h in header[2:] if h not in extra)
        data = np.array(body, dtype=float).reshape(len(body), len(header))
        if not np.all(np.isfinite(data)):
            bad = int(np.flatnonzero(~np.isfinite(data).all(axis=1))[0])
            raise ValueError(f"non-finite value in feature row {bad + 1}")
        col = {h: i for i, h in enumerate(header)}
        values = data[:, [col[h] for h in names]]
        labels = data[:, col["label"]].astype(np.int64) if "label" in col else None
        weights = data[:, col["sample_weight"]] if "sample_weight" in col else None
        return cls(data[:, 0].astype(np.int64) - 1, data[:, 1].astype(np.int64) - 1, values, names,
                   labels, weights, name=name)


@dataclass
class LabeledEdgeSet:
    labels: np.ndarray
    sample_weight: np.ndarray


@dataclass
class LpFeatures:
    r_hat: np.ndarray
    r_tilde: np.ndarray
    solved_at_root: bool
    x_root: np.ndarray = field(repr=False, default=None)
    x_cut: np.ndarray = field(repr=False, default=None)
    rounds: int = 0


def local_features(inst: Instance) -> np.ndarray:
    """Six weight-ratio features per edge, columns q_a..q_f, rows in canonical edge order.

    Row extremes use the smaller endpoint as i and the larger as j, and skip
    the diagonal.
    """
    w = np.asarray(inst.weights, dtype=float)
    iu, ju = edge_endpoints(inst.n)
    a = w[iu, ju]
    off = ~np.eye(inst.n, dtype=bool)
    row_max = np.where(off, w, -np.inf).max(axis=1)
    row_min = np.where(off, w, np.inf).min(axis=1)
    gmax, gmin = a.max(), a.min()
    return np.column_stack([
        (1 + a) / (1 + gmax),
        (1 + a) / (1 + row_max[iu]),
        (1 + a) / (1 + row_max[ju]),
        (1 + gmin) / (1 + a),
        (1 + row_min[iu]) / (1 + a),
        (1 + row_min[ju]) / (1 + a),
    ])


def mst_feature(inst: Instance, k: int) -> np.ndarray:
    """1/j for edges taken by the j-th successive MST, 0 for edges never taken.

    On small instances the residual graph can disconnect before ``k`` levels;
    the completed levels are used and a warning is logged.
    """
    try:
        ext = successive_mst_extract(WeightedGraph.complete(inst), k)
    except PartialExtractionError as exc:
        ext = exc.extraction
        log.warning("%s: %s", inst.name, exc)
    out = np.zeros(inst.m)
    for (a, b), level in ext.levels.items():
        out[edge_id(a, b, inst.n)] = 1.0 / level
    return out


def lp_features(inst: Instance, rounds: int, copies: int, seed: int, magnitude: float = 0.1,
                method: str = "highs") -> LpFeatures:
    cp = cutting_plane_features(inst, rounds, method)
    r_tilde = perturbed_mean_reduced_costs(inst, copies, seed, magnitude, method)
    solved = (integral_tour_check(cp.solution, inst) is not None
              or integral_tour_check(cp.root, inst) is not None)
    return LpFeatures(cp.r_hat, r_tilde, solved, cp.root.values, cp.solution.values, cp.rounds)


def label_edges(inst: Instance, tours: TourSet) -> LabeledEdgeSet:
    if not tours.tours:
        raise LabelingError("cannot label edges without at least one tour")
    labels = np.zeros(inst.m, dtype=np.int64)
    for a, b in tours.edge_union():
        labels[edge_id(a, b, inst.n)] = 1
    a = inst.edge_weights().astype(float)
    top = a.max()
    weight = a / top if top > 0 else np.ones_like(a)
    return LabeledEdgeSet(labels, weight)


def assemble_features(inst: Instance, config: Optional[FeatureConfig] = None,
                      tours: Optional[TourSet] = None) -> FeatureMatrix:
    cfg = (config or FeatureConfig()).resolved(inst.n)
    local = local_features(inst)
    lpf = lp_features(inst, cfg.k_rounds, cfg.copies, cfg.seed, cfg.perturbation, cfg.method)
    q_mst = mst_feature(inst, cfg.mst_k)
    cols = [local, lpf.r_hat[:, None], lpf.r_tilde[:, None], q_mst[:, None]]
    names = FEATURE_NAMES
    if cfg.include_lp_values:
        cols += [lpf.x_root[:, None], lpf.x_cut[:, None]]
        names = FEATURE_NAMES + LP_VALUE_NAMES
    iu, ju = edge_endpoints(inst.n)
    fm = FeatureMatrix(iu.astype(np.int64), ju.astype(np.int64), np.hstack(cols), names,
                       solved_at_root=lpf.solved_at_root, name=inst.name)
    if tours is not None:
        lab = label_edges(inst, tours)
        fm.labels, fm.sample_weight = lab.labels, lab.sample_weight
    return fm
