"""Gini decision trees and the bagged random forest built from them."""
import math

import numpy as np

from .. import kernels
from ..errors import AllZero
from ..rng import child_seed
from ._deadline import check_deadline

N_CLASSES = 4
LEAF = -1


def gini_impurity(class_counts):
    counts = np.asarray(class_counts, dtype=np.float64)
    if np.any(counts < 0):
        raise ValueError("class counts must be nonnegative")
    total = counts.sum()
    if total == 0:
        raise AllZero("gini impurity of an empty node is undefined")
    p = counts / total
    return float(1.0 - np.sum(p * p))


def majority(counts):
    """Most frequent class; the lower label wins a tie."""
    return int(np.argmax(counts))


def resolve_max_features(max_features, n_features):
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, math.isqrt(n_features))
    return max(1, min(int(max_features), n_features))


class DecisionTree:
    """Axis-aligned CART classifier grown on Gini impurity.

    A node becomes a leaf when it is pure, reaches ``max_depth``, or has no
    threshold leaving ``min_leaf`` rows on each side. ``x <= threshold`` goes
    left. Thresholds sit midway between consecutive distinct values.
    """

    def __init__(self, max_depth=None, min_leaf=1, max_features=None, seed=0):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.seed = seed

    def fit(self, X, y, sample_indices=None, deadline=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.int64)
        n, d = X.shape
        rng = np.random.default_rng(self.seed)
        m = resolve_max_features(self.max_features, d)
        idx = np.arange(n, dtype=np.int64) if sample_indices is None else np.asarray(sample_indices, dtype=np.int64)

        feature, threshold, left, right, value = [], [], [], [], []

        def new_node():
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(0)
            return len(feature) - 1

        root = new_node()
        stack = [(root, idx, 0)]
        while stack:
            node, node_idx, depth = stack.pop()
            counts = np.bincount(y[node_idx], minlength=N_CLASSES)
            value[node] = majority(counts)
            if np.count_nonzero(counts) <= 1:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            f, thr = self._split(X, y, node_idx, rng, m, d)
            if f < 0:
                continue
            go_left = X[node_idx, f] <= thr
            li, ri = new_node(), new_node()
            feature[node], threshold[node] = f, thr
            left[node], right[node] = li, ri
            # right pushed first so the left subtree is numbered first
            stack.append((ri, node_idx[~go_left], depth + 1))
            stack.append((li, node_idx[go_left], depth + 1))
            if len(feature) % 256 == 1:
                check_deadline(deadline, "tree growth")

        self.feature_ = np.array(feature, dtype=np.int64)
        self.threshold_ = np.array(threshold, dtype=np.float64)
        self.left_ = np.array(left, dtype=np.int64)
        self.right_ = np.array(right, dtype=np.int64)
        self.value_ = np.array(value, dtype=np.int64)
        return self

    def _split(self, X, y, node_idx, rng, m, d):
        if m >= d:
            return kernels.best_gini_split(X, y, node_idx, np.arange(d, dtype=np.int64), self.min_leaf)
        perm = rng.permutation(d)
        f, thr = kernels.best_gini_split(X, y, node_idx, np.sort(perm[:m]), self.min_leaf)
        if f < 0:
            # drawn features were all constant here; fall back to the rest
            f, thr = kernels.best_gini_split(X, y, node_idx, np.sort(perm[m:]), self.min_leaf)
        return f, thr

    @property
    def n_nodes(self):
        return int(self.feature_.size)

    @property
    def depth(self):
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature_[i] != LEAF:
                depths[self.left_[i]] = depths[self.right_[i]] = depths[i] + 1
        return int(depths.max())

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature_[node] != LEAF
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature_[cur]] <= self.threshold_[cur]
            node[rows] = np.where(go_left, self.left_[cur], self.right_[cur])
            active[rows] = self.feature_[node[rows]] != LEAF
        return node

    def predict(self, X):
        return self.value_[self.apply(X)]

    def get_state(self):
        return {
            "feature": self.feature_.tolist(),
            "threshold": self.threshold_.tolist(),
            "left": self.left_.tolist(),
            "right": self.right_.tolist(),
            "value": self.value_.tolist(),
        }

    def set_state(self, state):
        self.feature_ = np.array(state["feature"], dtype=np.int64)
        self.threshold_ = np.array(state["threshold"], dtype=np.float64)
        self.left_ = np.array(state["left"], dtype=np.int64)
        self.right_ = np.array(state["right"], dtype=np.int64)
        self.value_ = np.array(state["value"], dtype=np.int64)
        return self


class RandomForest:
    """Bagged Gini trees with per-split feature subsampling; hard majority vote.

    Tree ``t`` draws its bootstrap and feature subsets from its own substream
    ``(seed, "tree", t)``, so the forest does not depend on build order.
    """

    def __init__(self, n_trees=100, max_depth=None, min_leaf=1, max_features="sqrt",
                 bootstrap=True, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y, deadline=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.int64)
        n = X.shape[0]
        self.trees_ = []
        self.bootstrap_sizes_ = []
        for t in range(self.n_trees):
            tree_seed = child_seed(self.seed, "tree", t)
            rng = np.random.default_rng(tree_seed)
            sample = rng.integers(0, n, size=n) if self.bootstrap else None
            self.bootstrap_sizes_.append(n if sample is None else int(sample.size))
            tree = DecisionTree(self.max_depth, self.min_leaf, self.max_features,
                                seed=int(rng.integers(0, 2**63 - 1)))
            self.trees_.append(tree.fit(X, y, sample_indices=sample, deadline=deadline))
            check_deadline(deadline, "forest growth")
        return self

    def predict(self, X):
        votes = np.zeros((np.shape(X)[0], N_CLASSES), dtype=np.int64)
        rows = np.arange(votes.shape[0])
        for tree in self.trees_:
            votes[rows, tree.predict(X)] += 1
        return votes.argmax(axis=1)

    def summary(self):
        return {
            "n_trees": len(self.trees_),
            "mean_nodes": float(np.mean([t.n_nodes for t in self.trees_])) if self.trees_ else 0.0,
        }

    def get_state(self):
        return {"trees": [t.get_state() for t in self.trees_]}

    def set_state(self, state):
        self.trees_ = [DecisionTree().set_state(s) for s in state["trees"]]
        return self
