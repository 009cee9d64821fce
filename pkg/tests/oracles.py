"""Brute-force reference implementations, written independently of the package.

Everything here works on plain Python lists and ``fractions.Fraction`` so
that no code path is shared with the numpy/Cython kernels under test.
"""
from fractions import Fraction

N_CLASSES = 4


def midpoint(lo, hi):
    thr = (lo + hi) / 2.0
    if thr >= hi or thr in (float("inf"), float("-inf")):
        thr = lo
    return thr


def majority(labels, weights=None):
    mass = [Fraction(0)] * N_CLASSES
    for i, c in enumerate(labels):
        mass[c] += 1 if weights is None else weights[i]
    best = 0
    for c in range(1, N_CLASSES):
        if mass[c] > mass[best]:
            best = c
    return best


def gini(counts):
    total = sum(counts)
    return 1 - sum(Fraction(c, total) ** 2 for c in counts)


def candidate_thresholds(values):
    uniq = sorted(set(values))
    return [midpoint(a, b) for a, b in zip(uniq, uniq[1:])]


# ---- KNN ----

def knn_oracle(X, y, query, k):
    dists = []
    for i, row in enumerate(X):
        s = 0.0
        for a, b in zip(query, row):
            s += (a - b) * (a - b)
        dists.append((s, i))
    nn = sorted(dists)[:k]
    counts = [0] * N_CLASSES
    nearest = [None] * N_CLASSES
    for d, i in nn:
        counts[y[i]] += 1
        if nearest[y[i]] is None:
            nearest[y[i]] = d
    top = max(counts)
    tied = [c for c in range(N_CLASSES) if counts[c] == top]
    return min(tied, key=lambda c: (nearest[c], c))


# ---- unlimited Gini tree ----

def tree_oracle(X, y):
    """Return a predict function for a fully grown tree found by exhaustive search."""
    rows = list(range(len(X)))

    def grow(idx):
        labels = [y[i] for i in idx]
        if len(set(labels)) <= 1:
            return ("leaf", majority(labels))
        n = len(idx)
        best = None
        for f in range(len(X[0])):
            for thr in candidate_thresholds([X[i][f] for i in idx]):
                left = [i for i in idx if X[i][f] <= thr]
                right = [i for i in idx if X[i][f] > thr]
                imp = sum(
                    Fraction(len(side), n) * gini([sum(1 for i in side if y[i] == c) for c in range(N_CLASSES)])
                    for side in (left, right)
                )
                if best is None or imp < best[0]:
                    best = (imp, f, thr, left, right)
        if best is None:
            return ("leaf", majority(labels))
        _, f, thr, left, right = best
        return ("split", f, thr, grow(left), grow(right))

    root = grow(rows)

    def predict(x):
        node = root
        while node[0] == "split":
            _, f, thr, lt, rt = node
            node = lt if x[f] <= thr else rt
        return node[1]

    return predict


# ---- weighted Gini stump ----

def stump_oracle(X, y, weights=None):
    """Exhaustive (feature, threshold) search; returns ``(feature, threshold, left, right)``."""
    n = len(X)
    w = [Fraction(1, n)] * n if weights is None else [Fraction(v) for v in weights]

    def side_impurity(side):
        mass = [sum((w[i] for i in side if y[i] == c), Fraction(0)) for c in range(N_CLASSES)]
        tot = sum(mass)
        return tot - sum(m * m for m in mass) / tot

    best = None
    for f in range(len(X[0])):
        for thr in candidate_thresholds([row[f] for row in X]):
            left = [i for i in range(n) if X[i][f] <= thr]
            right = [i for i in range(n) if X[i][f] > thr]
            imp = side_impurity(left) + side_impurity(right)
            if best is None or imp < best[0]:
                lc = majority([y[i] for i in left], [w[i] for i in left])
                rc = majority([y[i] for i in right], [w[i] for i in right])
                best = (imp, f, thr, lc, rc)
    if best is None:
        c = majority(y, w)
        return (-1, 0.0, c, c)
    return best[1:]
