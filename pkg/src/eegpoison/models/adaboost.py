"""Discrete multi-class AdaBoost (SAMME) over decision stumps."""
import math

import numpy as np

from .. import kernels
from .._pykernels import split_threshold
from ._deadline import check_deadline

N_CLASSES = 4
ERR_CLAMP = 1e-10
# relative slack under which two stump impurities count as equal
TIE_TOL = 1e-12


def samme_alpha(weighted_error, n_classes=N_CLASSES):
    err = min(max(float(weighted_error), ERR_CLAMP), 1.0 - ERR_CLAMP)
    return math.log((1.0 - err) / err) + math.log(n_classes - 1)


class Stump:
    def __init__(self, feature=-1, threshold=0.0, left_class=0, right_class=0):
        self.feature = feature
        self.threshold = threshold
        self.left_class = left_class
        self.right_class = right_class

    def predict(self, X):
        X = np.asarray(X)
        if self.feature < 0:
            return np.full(X.shape[0], self.left_class, dtype=np.int64)
        return np.where(X[:, self.feature] <= self.threshold, self.left_class, self.right_class).astype(np.int64)

    def as_tuple(self):
        return (self.feature, self.threshold, self.left_class, self.right_class)


def sorted_order(X):
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T, dtype=np.int64)


def fit_stump(X, y, w, order=None):
    """Depth-one tree with the lowest weighted Gini impurity.

    Each side predicts its heaviest class (lower label on ties). Among stumps
    within ``TIE_TOL`` of the optimum the first by (feature, threshold) wins.
    With no usable threshold the stump is constant.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if order is None:
        order = sorted_order(X)
    err, _, _ = kernels.stump_impurity(X, y, w, order)
    if err.size == 0 or not np.isfinite(err).any():
        totals = np.bincount(y, weights=w, minlength=N_CLASSES)
        c = int(np.argmax(totals))
        return Stump(-1, 0.0, c, c)
    best = err.min()
    flat = int(np.flatnonzero(err.ravel() <= best + TIE_TOL * w.sum())[0])
    f, i = divmod(flat, err.shape[1])
    lo, hi = X[order[f, i], f], X[order[f, i + 1], f]
    thr = split_threshold(lo, hi)
    # side classes from the running sums can differ by an ulp on exact ties, so
    # re-derive them with the same slack and let the lower label win
    left = X[:, f] <= thr
    slack = TIE_TOL * w.sum()
    return Stump(int(f), thr, _heaviest(y[left], w[left], slack), _heaviest(y[~left], w[~left], slack))


def _heaviest(y, w, slack):
    totals = np.bincount(y, weights=w, minlength=N_CLASSES)
    return int(np.flatnonzero(totals >= totals.max() - slack)[0])


class AdaBoostSAMME:
    """SAMME boosting; stops early on a chance-level or a perfect stump.

    A perfect stump is kept with the capped weight ``samme_alpha(0)``. When
    even the first stump is no better than chance it is kept with unit weight
    so the ensemble still predicts.
    """

    def __init__(self, n_rounds=50, seed=0):
        self.n_rounds = n_rounds
        self.seed = seed

    def fit(self, X, y, deadline=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.int64)
        n = X.shape[0]
        order = sorted_order(X)
        w = np.full(n, 1.0 / n)
        self.stumps_, self.alphas_ = [], []
        self.errors_, self.weight_sums_ = [], []
        chance = (N_CLASSES - 1) / N_CLASSES
        for _ in range(self.n_rounds):
            stump = fit_stump(X, y, w, order)
            miss = stump.predict(X) != y
            err = float(w[miss].sum() / w.sum())
            self.errors_.append(err)
            if err >= chance:
                if not self.stumps_:
                    self.stumps_.append(stump)
                    self.alphas_.append(1.0)
                break
            alpha = samme_alpha(err)
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            if err <= 0.0:
                break
            w = w * np.exp(alpha * miss)
            w /= w.sum()
            self.weight_sums_.append(float(w.sum()))
            check_deadline(deadline, "boosting")
        return self

    def decision_function(self, X):
        X = np.asarray(X, dtype=np.float64)
        scores = np.zeros((X.shape[0], N_CLASSES))
        rows = np.arange(X.shape[0])
        for stump, alpha in zip(self.stumps_, self.alphas_):
            scores[rows, stump.predict(X)] += alpha
        return scores

    def predict(self, X):
        return self.decision_function(X).argmax(axis=1)

    def summary(self):
        return {"rounds": len(self.stumps_), "errors": list(self.errors_)}

    def get_state(self):
        return {"stumps": [list(s.as_tuple()) for s in self.stumps_], "alphas": list(self.alphas_)}

    def set_state(self, state):
        self.stumps_ = [Stump(int(f), float(t), int(l), int(r)) for f, t, l, r in state["stumps"]]
        self.alphas_ = [float(a) for a in state["alphas"]]
        return self
