"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 1000]

Each row reports the best-of-``repeat`` wall time per backend and the
speedup. Outputs of the two backends are checked for equality first.
"""
import argparse
import time

import numpy as np

from eegpoison import _pykernels, kernels
from eegpoison.models.adaboost import sorted_order
from eegpoison.models.tree import RandomForest

try:
    from eegpoison import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def use(impl):
    for name in ("best_gini_split", "stump_impurity", "knn_predict"):
        setattr(kernels, name, getattr(impl, name))


def cases(n, seed=0):
    rng = np.random.default_rng(seed)
    X = np.ascontiguousarray(rng.normal(size=(n, 25)))
    y = rng.integers(0, 4, n).astype(np.int64)
    Q = np.ascontiguousarray(rng.normal(size=(n // 4, 25)))
    w = np.full(n, 1.0 / n)
    order = sorted_order(X)
    idx = np.arange(n, dtype=np.int64)
    feats = np.arange(25, dtype=np.int64)
    return {
        "gini split (root node)": lambda k: k.best_gini_split(X, y, idx, feats, 1),
        "stump impurity table": lambda k: k.stump_impurity(X, y, w, order),
        "knn predict (k=5)": lambda k: k.knn_predict(X, y, Q, 5),
        "random forest fit (20 trees)": lambda k: (use(k), RandomForest(n_trees=20, seed=1).fit(X, y)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=1000, help="training rows")
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled extension not built; run `pip install --no-build-isolation -e .` first")

    original = {name: getattr(kernels, name) for name in ("best_gini_split", "stump_impurity", "knn_predict")}
    print(f"n={args.n}, best of {args.repeat}, default backend: {kernels.BACKEND}")
    print(f"{'kernel':<30} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    try:
        for name, fn in cases(args.n).items():
            a, b = fn(_pykernels), fn(_ckernels)
            if not name.startswith("random forest"):
                pairs = zip(a, b) if isinstance(a, tuple) else [(a, b)]
                same = all(np.array_equal(u, v) for u, v in pairs)
                assert same, f"backends disagree on {name}"
            tp = best_of(lambda: fn(_pykernels), args.repeat)
            tc = best_of(lambda: fn(_ckernels), args.repeat)
            print(f"{name:<30} {1e3 * tp:>12.2f} {1e3 * tc:>12.2f} {tp / tc:>7.1f}x")
    finally:
        for name, impl in original.items():
            setattr(kernels, name, impl)


if __name__ == "__main__":
    main()
