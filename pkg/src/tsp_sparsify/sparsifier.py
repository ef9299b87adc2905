"""Weighted logistic-regression edge classifier, pruning and tour insertion."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .features import FeatureMatrix
from .graph import Tour, WeightedGraph, successive_mst_extract, validate_order
from .tsplib import Instance, SparsifiedInstance, edge_id

MODEL_VERSION = 1


class TrainingError(ValueError):
    pass


class SchemaError(ValueError):
    pass


@dataclass
class TrainConfig:
    class_weights: tuple = (0.01, 0.99)
    undersample: bool = True
    seed: int = 0
    learning_rate: float = 0.5
    lr_decay: float = 1e-3
    epochs: int = 3000
    l2: float = 1e-4

    def __post_init__(self):
        neg, pos = (float(x) for x in self.class_weights)
        if neg <= 0 or pos <= 0 or abs(neg + pos - 1.0) > 1e-9:
            raise ValueError("class weights must be positive and sum to 1")
        self.class_weights = (neg, pos)


@dataclass
class Model:
    feature_names: tuple
    means: np.ndarray
    stds: np.ndarray
    weights: np.ndarray
    bias: float
    threshold: float = 0.5
    seed: int = 0
    train_config: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        self.means = np.asarray(self.means, dtype=float)
        self.stds = np.asarray(self.stds, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.stds <= 0):
            raise ValueError("standardization scales must be positive")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")

    def probabilities(self, values: np.ndarray) -> np.ndarray:
        z = ((values - self.means) / self.stds) @ self.weights + self.bias
        return _sigmoid(z)

    def to_json(self) -> str:
        doc = {
            "version": MODEL_VERSION,
            "feature_names": list(self.feature_names),
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "weights": self.weights.tolist(),
            "bias": float(self.bias),
            "threshold": float(self.threshold),
            "seed": int(self.seed),
            "train_config": self.train_config,
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Model":
        doc = json.loads(text)
        if doc.get("version") != MODEL_VERSION:
            raise SchemaError(f"unsupported model version {doc.get('version')}")
        names = doc["feature_names"]
        for key in ("means", "stds", "weights"):
            if len(doc[key]) != len(names):
                raise SchemaError(f"{key} has {len(doc[key])} entries for {len(names)} features")
        return cls(names, doc["means"], doc["stds"], doc["weights"], doc["bias"], doc["threshold"],
                   doc.get("seed", 0), doc.get("train_config", {}), doc.get("metadata", {}))


def save_model(model: Model, path) -> None:
    with open(path, "w") as fh:
        fh.write(model.to_json())


def load_model(path) -> Model:
    with open(path) as fh:
        return Model.from_json(fh.read())


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _stack(data: Sequence[FeatureMatrix]):
    names = data[0].names
    for fm in data:
        if fm.names != names:
            raise SchemaError("all training matrices must share the same feature columns")
        if fm.labels is None or fm.sample_weight is None:
            raise TrainingError(f"matrix {fm.name!r} has no labels or sample weights")
        bad = ~np.isfinite(fm.values).all(axis=1)
        if bad.any():
            raise TrainingError(f"non-finite feature in matrix {fm.name!r}, row {int(np.flatnonzero(bad)[0])}")
    return names


def train_model(data: Sequence[FeatureMatrix], cfg: Optional[TrainConfig] = None) -> Model:
    """Fit a class- and sample-weighted logistic regression by batch gradient descent.

    Each instance's negatives are undersampled (uniformly, without
    replacement) to the size of its positive class. Each sample counts with
    weight ``class_weight[label] * sample_weight``.
    """
    cfg = cfg or TrainConfig()
    data = list(data)
    if not data:
        raise TrainingError("no training data")
    names = _stack(data)
    X_all = np.vstack([fm.values for fm in data])
    y_all = np.concatenate([fm.labels for fm in data]).astype(float)
    if y_all.min() == y_all.max():
        raise TrainingError("training data contains a single class")

    rng = np.random.default_rng(cfg.seed)
    xs, ys, ws = [], [], []
    for fm in data:
        y = fm.labels.astype(bool)
        keep = np.ones(len(y), dtype=bool)
        if cfg.undersample:
            neg = np.flatnonzero(~y)
            take = min(len(neg), int(y.sum()))
            keep = y.copy()
            keep[rng.choice(neg, size=take, replace=False)] = True
        xs.append(fm.values[keep])
        ys.append(fm.labels[keep].astype(float))
        ws.append(fm.sample_weight[keep])
    X = np.vstack(xs)
    y = np.concatenate(ys)
    cw = np.where(y > 0.5, cfg.class_weights[1], cfg.class_weights[0])
    s = cw * np.concatenate(ws)
    if s.sum() <= 0:
        raise TrainingError("all effective sample weights are zero")
    s = s / s.sum()

    means = X_all.mean(axis=0)
    stds = X_all.std(axis=0)
    stds[stds <= 1e-12] = 1.0
    Z = (X - means) / stds
    w = np.zeros(Z.shape[1])
    b = 0.0
    for epoch in range(cfg.epochs):
        p = _sigmoid(Z @ w + b)
        g = s * (p - y)
        lr = cfg.learning_rate / (1.0 + cfg.lr_decay * epoch)
        w -= lr * (Z.T @ g + cfg.l2 * w)
        b -= lr * g.sum()
    p = np.clip(_sigmoid(Z @ w + b), 1e-15, 1 - 1e-15)
    loss = float(-(s * (y * np.log(p) + (1 - y) * np.log(1 - p))).sum() + 0.5 * cfg.l2 * w @ w)

    model = Model(names, means, stds, w, b, 0.5, cfg.seed, asdict(cfg))
    pred = model.probabilities(X_all) >= 0.5
    truth = y_all > 0.5
    model.metadata = {
        "loss": loss,
        "rows": int(len(y_all)),
        "rows_used": int(len(y)),
        "confusion": {"tp": int((pred & truth).sum()), "fp": int((pred & ~truth).sum()),
                      "tn": int((~pred & ~truth).sum()), "fn": int((~pred & truth).sum())},
    }
    return model


def predict_mask(model: Model, feats: FeatureMatrix, threshold: Optional[float] = None):
    """Keep/prune decision per edge and the classifier probability."""
    if tuple(feats.names) != tuple(model.feature_names):
        raise SchemaError(f"feature columns {feats.names} do not match model columns {model.feature_names}")
    prob = model.probabilities(feats.values)
    t = model.threshold if threshold is None else threshold
    return prob >= t, prob


def prune_instance(inst: Instance, mask) -> SparsifiedInstance:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (inst.m,):
        raise ValueError(f"mask must have one entry per edge ({inst.m})")
    return SparsifiedInstance(inst, mask, np.zeros(inst.m, dtype=bool))


def tour_mask(tour: Tour, n: int) -> np.ndarray:
    mask = np.zeros(n * (n - 1) // 2, dtype=bool)
    for a, b in tour.edges():
        mask[edge_id(a, b, n)] = True
    return mask


def insert_tour_edges(s: SparsifiedInstance, tours: Iterable[Tour]) -> SparsifiedInstance:
    """Add every edge of each tour so the pruned graph keeps a Hamiltonian cycle."""
    retained = s.retained.copy()
    inserted = s.inserted.copy()
    for t in tours:
        validate_order(t.order, s.base.n)
        add = tour_mask(t, s.base.n)
        inserted |= add & ~retained
        retained |= add
    return SparsifiedInstance(s.base, retained, inserted)


def contains_tour(s: SparsifiedInstance, tour: Tour) -> bool:
    return bool(np.all(s.retained[tour_mask(tour, s.base.n)]))


def mst_only_sparsify(inst: Instance, k: int) -> SparsifiedInstance:
    """Keep exactly the k(n-1) edges of k successive minimum spanning trees."""
    ext = successive_mst_extract(WeightedGraph.complete(inst), k)
    mask = np.zeros(inst.m, dtype=bool)
    for a, b in ext.levels:
        mask[edge_id(a, b, inst.n)] = True
    return prune_instance(inst, mask)
