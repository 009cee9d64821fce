"""The four classifiers behind one fit/predict interface.

Hyperparameters live in frozen spec dataclasses; ``fit`` turns a spec and a
training set into a ``TrainedModel`` which carries its own feature scaler and
serialises to a versioned JSON document.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import N_CLASSES, Dataset, RiskLabel, Scaler, fit_scaler_array
from ..errors import DimensionMismatch, EmptyTrainingSet
from ..rng import child_seed
from .adaboost import AdaBoostSAMME, Stump, fit_stump, samme_alpha
from .knn import KNNClassifier
from .mlp import MLP, gradient_check
from .tree import DecisionTree, RandomForest, gini_impurity

MODEL_FORMAT = "eegpoison-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class KNNSpec:
    k: int = 5
    scale: bool = True
    kind = "knn"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")

    def build(self, seed):
        return KNNClassifier(self.k)


@dataclass(frozen=True)
class RandomForestSpec:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    features_per_split: int | str | None = "sqrt"
    bootstrap: bool = True
    seed: int = 0
    scale: bool = False
    kind = "random_forest"

    def __post_init__(self):
        if self.n_trees < 1 or self.min_leaf < 1 or (self.max_depth is not None and self.max_depth < 1):
            raise ValueError("forest sizes must be positive")

    def build(self, seed):
        return RandomForest(self.n_trees, self.max_depth, self.min_leaf, self.features_per_split,
                            self.bootstrap, seed)


@dataclass(frozen=True)
class AdaBoostSpec:
    n_rounds: int = 50
    seed: int = 0
    scale: bool = False
    kind = "adaboost"

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be positive")

    def build(self, seed):
        return AdaBoostSAMME(self.n_rounds, seed)


@dataclass(frozen=True)
class MLPSpec:
    hidden: tuple = (64, 32)
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 200
    seed: int = 0
    scale: bool = True
    kind = "mlp"

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if any(h < 1 for h in self.hidden) or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("MLP sizes must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")

    def build(self, seed):
        return MLP(self.hidden, self.learning_rate, self.momentum, self.batch_size, self.epochs, seed)


SPEC_TYPES = {cls.kind: cls for cls in (KNNSpec, RandomForestSpec, AdaBoostSpec, MLPSpec)}
ESTIMATOR_TYPES = {
    "knn": KNNClassifier,
    "random_forest": RandomForest,
    "adaboost": AdaBoostSAMME,
    "mlp": MLP,
}


def spec_to_dict(spec) -> dict:
    d = {"kind": spec.kind}
    for f in dataclasses.fields(spec):
        v = getattr(spec, f.name)
        d[f.name] = list(v) if isinstance(v, tuple) else v
    return d


def spec_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in SPEC_TYPES:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(SPEC_TYPES)}")
    cls = SPEC_TYPES[kind]
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ValueError(f"unknown {kind} parameters: {sorted(unknown)}")
    return cls(**d)


def fingerprint(spec) -> str:
    blob = json.dumps(spec_to_dict(spec), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def estimator_seed(spec):
    return child_seed(getattr(spec, "seed", 0), spec.kind)


@dataclass
class TrainedModel:
    spec: object
    estimator: object
    scaler: Scaler | None = None
    n_features: int = 25
    summary: dict = field(default_factory=dict)

    def _prepare(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got shape {X.shape}")
        if self.scaler is not None:
            X = self.scaler.transform(X)
        return np.ascontiguousarray(X)

    def predict_batch(self, X) -> np.ndarray:
        return np.asarray(self.estimator.predict(self._prepare(X)), dtype=np.int64)

    def predict(self, features) -> RiskLabel:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 1:
            raise DimensionMismatch("predict takes a single feature vector; use predict_batch")
        return RiskLabel(int(self.predict_batch(features)[0]))

    def predict_dataset(self, ds: Dataset) -> np.ndarray:
        return self.predict_batch(ds.X)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "spec": spec_to_dict(self.spec),
            "n_features": self.n_features,
            "scaler": None if self.scaler is None else self.scaler.to_dict(),
            "state": self.estimator.get_state(),
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise ValueError("not a supported model document")
        spec = spec_from_dict(d["spec"])
        est = ESTIMATOR_TYPES[spec.kind].__new__(ESTIMATOR_TYPES[spec.kind])
        est.set_state(d["state"])
        if spec.kind == "knn":
            est.k = spec.k
        scaler = None if d["scaler"] is None else Scaler.from_dict(d["scaler"])
        return cls(spec, est, scaler, int(d["n_features"]), d.get("summary", {}))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_arrays(spec, X, y, deadline=None) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit on an empty training set")
    if y.shape != (X.shape[0],) or (y.size and (y.min() < 0 or y.max() >= N_CLASSES)):
        raise ValueError("labels must be a vector of classes 0..3 matching X")
    scaler = fit_scaler_array(X) if spec.scale else None
    Xs = np.ascontiguousarray(scaler.transform(X) if scaler else X)
    est = spec.build(estimator_seed(spec))
    est.fit(Xs, y, deadline=deadline)
    summary = est.summary() if hasattr(est, "summary") else {}
    return TrainedModel(spec, est, scaler, X.shape[1], summary)


def fit(spec, train: Dataset, deadline=None) -> TrainedModel:
    """Fit ``spec`` on ``train``; deterministic given the spec's seed."""
    if len(train) == 0:
        raise EmptyTrainingSet("cannot fit on an empty training set")
    return fit_arrays(spec, train.X, train.y, deadline=deadline)


def predict(model: TrainedModel, features) -> RiskLabel:
    return model.predict(features)


def mlp_gradient_check(spec: MLPSpec, train: Dataset | tuple, epsilon=1e-5) -> float:
    """Max relative error between backprop and central differences at the spec's initial weights."""
    X, y = (train.X, train.y) if isinstance(train, Dataset) else train
    net = spec.build(estimator_seed(spec))
    net.init_params(np.shape(X)[1])
    return gradient_check(net, X, y, epsilon)


DEFAULT_SPECS = {
    "knn": KNNSpec(),
    "random_forest": RandomForestSpec(),
    "adaboost": AdaBoostSpec(),
    "mlp": MLPSpec(),
}

__all__ = [
    "AdaBoostSAMME", "AdaBoostSpec", "DecisionTree", "KNNClassifier", "KNNSpec", "MLP", "MLPSpec",
    "RandomForest", "RandomForestSpec", "Stump", "TrainedModel", "DEFAULT_SPECS", "fit", "fit_arrays",
    "fit_stump", "fingerprint", "gini_impurity", "mlp_gradient_check", "predict", "samme_alpha",
    "spec_from_dict", "spec_to_dict",
]
