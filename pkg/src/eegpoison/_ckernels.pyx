# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the loops in ``_pykernels``; results are bit-identical."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, isfinite
from libc.stdlib cimport malloc, free, qsort

from . import _pykernels

cnp.import_array()

cdef enum:
    NC = 4
    # exact int64 cross-multiplication stays below 2**63 up to this node size
    MAX_EXACT_N = 4000


cdef struct ValIdx:
    double value
    long long label
    long long pos


cdef int _cmp_validx(const void* a, const void* b) noexcept nogil:
    cdef const ValIdx* x = <const ValIdx*> a
    cdef const ValIdx* y = <const ValIdx*> b
    if x.value < y.value:
        return -1
    if x.value > y.value:
        return 1
    if x.pos < y.pos:
        return -1
    if x.pos > y.pos:
        return 1
    return 0


cdef inline double _threshold(double lo, double hi) noexcept nogil:
    cdef double thr = (lo + hi) / 2.0
    if thr >= hi or not isfinite(thr):
        thr = lo
    return thr


def best_gini_split(const double[:, ::1] X, const long long[::1] y, idx, features, Py_ssize_t min_leaf):
    cdef const long long[::1] idx_v = np.ascontiguousarray(idx, dtype=np.int64)
    cdef const long long[::1] feat_v = np.ascontiguousarray(features, dtype=np.int64)
    cdef Py_ssize_t n = idx_v.shape[0]
    if n > MAX_EXACT_N:
        return _pykernels.best_gini_split(np.asarray(X), np.asarray(y), np.asarray(idx_v),
                                          np.asarray(feat_v), min_leaf)
    if n < 2 * min_leaf:
        return -1, 0.0
    cdef long long total[NC]
    cdef long long left[NC]
    cdef Py_ssize_t i, c, fi
    cdef long long f, nl, nr, sl, sr, r, num, den
    cdef long long best_num = 0, best_den = 1
    cdef long long best_f = -1
    cdef double best_thr = 0.0
    cdef ValIdx* buf = <ValIdx*> malloc(n * sizeof(ValIdx))
    if buf == NULL:
        raise MemoryError()
    try:
        for c in range(NC):
            total[c] = 0
        for i in range(n):
            total[y[idx_v[i]]] += 1
        for fi in range(feat_v.shape[0]):
            f = feat_v[fi]
            for i in range(n):
                buf[i].value = X[idx_v[i], f]
                buf[i].label = y[idx_v[i]]
                buf[i].pos = i
            qsort(buf, n, sizeof(ValIdx), _cmp_validx)
            for c in range(NC):
                left[c] = 0
            for i in range(n - 1):
                left[buf[i].label] += 1
                if not (buf[i].value < buf[i + 1].value):
                    continue
                nl = i + 1
                nr = n - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                sl = 0
                sr = 0
                for c in range(NC):
                    sl += left[c] * left[c]
                    r = total[c] - left[c]
                    sr += r * r
                num = sl * nr + sr * nl
                den = nl * nr
                if best_f < 0 or num * best_den > best_num * den:
                    best_num = num
                    best_den = den
                    best_f = f
                    best_thr = _threshold(buf[i].value, buf[i + 1].value)
    finally:
        free(buf)
    if best_f < 0:
        return -1, 0.0
    return int(best_f), float(best_thr)


cdef inline double _side_impurity(double c0, double c1, double c2, double c3) noexcept nogil:
    cdef double tot = ((c0 + c1) + c2) + c3
    cdef double sq = ((c0 * c0 + c1 * c1) + c2 * c2) + c3 * c3
    if tot > 0.0:
        return tot - sq / tot
    return 0.0


def stump_impurity(const double[:, ::1] X, const long long[::1] y, const double[::1] w,
                   const long long[:, ::1] order):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t m = n - 1 if n > 1 else 0
    imp_a = np.full((d, m), np.inf)
    lc_a = np.zeros((d, m), dtype=np.int64)
    rc_a = np.zeros((d, m), dtype=np.int64)
    if n < 2:
        return imp_a, lc_a, rc_a
    cdef double[:, ::1] imp = imp_a
    cdef long long[:, ::1] lcls = lc_a
    cdef long long[:, ::1] rcls = rc_a
    cdef double total[NC]
    cdef double left[NC]
    cdef double right[NC]
    cdef Py_ssize_t f, i, c, o, al, ar
    for f in range(d):
        for c in range(NC):
            total[c] = 0.0
            left[c] = 0.0
        for i in range(n):
            o = order[f, i]
            total[y[o]] += w[o]
        for i in range(n - 1):
            o = order[f, i]
            left[y[o]] += w[o]
            al = 0
            ar = 0
            for c in range(NC):
                right[c] = total[c] - left[c]
            for c in range(1, NC):
                if left[c] > left[al]:
                    al = c
                if right[c] > right[ar]:
                    ar = c
            lcls[f, i] = al
            rcls[f, i] = ar
            if X[o, f] == X[order[f, i + 1], f]:
                continue
            imp[f, i] = (_side_impurity(left[0], left[1], left[2], left[3])
                         + _side_impurity(right[0], right[1], right[2], right[3]))
    return imp_a, lc_a, rc_a


def knn_predict(const double[:, ::1] X_train, const long long[::1] y_train,
                const double[:, ::1] X_query, Py_ssize_t k):
    cdef Py_ssize_t n = X_train.shape[0], d = X_train.shape[1], nq = X_query.shape[0]
    if k > n:
        k = n
    out_a = np.empty(nq, dtype=np.int64)
    cdef long long[::1] out = out_a
    cdef double* nd = <double*> malloc(k * sizeof(double))
    cdef Py_ssize_t* ni = <Py_ssize_t*> malloc(k * sizeof(Py_ssize_t))
    cdef long long counts[NC]
    cdef double nearest[NC]
    cdef Py_ssize_t q, t, j, filled, pos, c, best
    cdef double dist, diff
    if nd == NULL or ni == NULL:
        free(nd)
        free(ni)
        raise MemoryError()
    try:
        for q in range(nq):
            filled = 0
            for t in range(n):
                dist = 0.0
                for j in range(d):
                    diff = X_query[q, j] - X_train[t, j]
                    dist += diff * diff
                # keep the k smallest (dist, index); later rows lose exact ties
                if filled == k and not (dist < nd[k - 1]):
                    continue
                pos = filled if filled < k else k - 1
                while pos > 0 and dist < nd[pos - 1]:
                    if pos < k:
                        nd[pos] = nd[pos - 1]
                        ni[pos] = ni[pos - 1]
                    pos -= 1
                nd[pos] = dist
                ni[pos] = t
                if filled < k:
                    filled += 1
            for c in range(NC):
                counts[c] = 0
                nearest[c] = INFINITY
            for j in range(filled):
                c = y_train[ni[j]]
                counts[c] += 1
                if nd[j] < nearest[c]:
                    nearest[c] = nd[j]
            best = 0
            for c in range(1, NC):
                if counts[c] > counts[best] or (counts[c] == counts[best] and nearest[c] < nearest[best]):
                    best = c
            out[q] = best
    finally:
        free(nd)
        free(ni)
    return out_a
