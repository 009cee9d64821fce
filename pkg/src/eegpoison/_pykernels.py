"""Pure numpy implementations of the hot loops.

Each function has a Cython twin in ``_ckernels.pyx`` with the same signature
and bit-identical results; ``kernels`` picks one at import time.
"""
import numpy as np

N_CLASSES = 4


def split_threshold(lo, hi):
    thr = (lo + hi) / 2.0
    # adjacent floats: the midpoint can round up onto ``hi``
    if thr >= hi or not np.isfinite(thr):
        thr = lo
    return float(thr)


def best_gini_split(X, y, idx, features, min_leaf):
    """Best Gini split of the node holding rows ``idx`` (duplicates allowed).

    Minimising weighted child impurity is the same as maximising
    ``SL / nL + SR / nR`` with ``S`` the sum of squared class counts; that ratio
    is compared exactly in integers. Ties go to the earlier feature in
    ``features`` and then the lower threshold. Returns ``(feature, threshold)``
    or ``(-1, 0.0)`` when no valid split exists.
    """
    idx = np.asarray(idx, dtype=np.int64)
    n = idx.size
    best = None  # (num, den, feature, threshold)
    if n < 2 * min_leaf:
        return -1, 0.0
    yn = y[idx]
    total = np.bincount(yn, minlength=N_CLASSES).astype(np.int64)
    n_left = np.arange(1, n, dtype=np.int64)
    n_right = n - n_left
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        onehot = np.zeros((n, N_CLASSES), dtype=np.int64)
        onehot[np.arange(n), yn[order]] = 1
        left = np.cumsum(onehot, axis=0)[:-1]
        right = total - left
        sl = (left * left).sum(axis=1)
        sr = (right * right).sum(axis=1)
        valid = (sv[:-1] < sv[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue
        num = sl * n_right + sr * n_left
        den = n_left * n_right
        score = np.where(valid, num / den, -np.inf)
        top = score.max()
        cands = np.flatnonzero(score >= top * (1.0 - 1e-9))
        pos = None
        for c in cands:
            if pos is None or int(num[c]) * int(den[pos]) > int(num[pos]) * int(den[c]):
                pos = c
        fnum, fden = int(num[pos]), int(den[pos])
        if best is None or fnum * best[1] > best[0] * fden:
            best = (fnum, fden, int(f), split_threshold(sv[pos], sv[pos + 1]))
    if best is None:
        return -1, 0.0
    return best[2], best[3]


def stump_impurity(X, y, w, order):
    """Weighted Gini impurity of every candidate stump.

    ``order[f]`` is a stable argsort of column ``f``. Entry ``(f, i)`` of the
    returned ``(d, n - 1)`` array is ``sum_side (W_side - sum_c W_c**2 / W_side)``
    for the threshold between sorted positions ``i`` and ``i + 1`` (``inf`` where
    those values are equal). Also returns each side's heaviest class.
    Accumulation is strictly sequential in sorted order.
    """
    n, d = X.shape
    m = max(n - 1, 0)
    imp = np.full((d, m), np.inf)
    left_cls = np.zeros((d, m), dtype=np.int64)
    right_cls = np.zeros((d, m), dtype=np.int64)
    if n < 2:
        return imp, left_cls, right_cls
    for f in range(d):
        o = order[f]
        wy = np.zeros((n, N_CLASSES))
        wy[np.arange(n), y[o]] = w[o]
        cum = np.cumsum(wy, axis=0)
        total = cum[-1]
        left = cum[:-1]
        right = total - left
        left_cls[f] = left.argmax(axis=1)
        right_cls[f] = right.argmax(axis=1)
        e = _side_impurity(left) + _side_impurity(right)
        sv = X[o, f]
        e[sv[:-1] == sv[1:]] = np.inf
        imp[f] = e
    return imp, left_cls, right_cls


def _side_impurity(W):
    c0, c1, c2, c3 = W[:, 0], W[:, 1], W[:, 2], W[:, 3]
    tot = ((c0 + c1) + c2) + c3
    sq = ((c0 * c0 + c1 * c1) + c2 * c2) + c3 * c3
    with np.errstate(divide="ignore", invalid="ignore"):
        out = tot - sq / tot
    return np.where(tot > 0.0, out, 0.0)


def knn_predict(X_train, y_train, X_query, k):
    """Majority vote of the ``k`` nearest rows (Euclidean, ties by row index).

    Vote ties go to the class whose nearest member is closest, then to the
    lower label.
    """
    n = X_train.shape[0]
    k = min(k, n)
    dist = np.zeros((X_query.shape[0], n))
    for j in range(X_train.shape[1]):
        diff = X_query[:, j][:, None] - X_train[:, j][None, :]
        dist += diff * diff
    out = np.empty(X_query.shape[0], dtype=np.int64)
    for q in range(X_query.shape[0]):
        nn = np.argsort(dist[q], kind="stable")[:k]
        out[q] = vote(y_train[nn], dist[q, nn])
    return out


def vote(labels, dists):
    counts = np.bincount(labels, minlength=N_CLASSES)
    tied = np.flatnonzero(counts == counts.max())
    if tied.size == 1:
        return int(tied[0])
    nearest = [dists[labels == c].min() for c in tied]
    return int(tied[int(np.argmin(nearest))])
