from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegpoison.errors import EmptyInput, EmptyMatrix, LengthMismatch
from eegpoison.metrics import ConfusionMatrix, confusion, evaluate, pct, summarize


def fraction_metrics(t, p):
    """Exact reference: macro scores over all 4 classes with 0 for undefined ratios."""
    prec, rec, f1 = [], [], []
    for c in range(4):
        tp = sum(1 for a, b in zip(t, p) if a == b == c)
        pp = sum(1 for b in p if b == c)
        ap = sum(1 for a in t if a == c)
        pr = Fraction(tp, pp) if pp else Fraction(0)
        rc = Fraction(tp, ap) if ap else Fraction(0)
        prec.append(pr)
        rec.append(rc)
        f1.append(2 * pr * rc / (pr + rc) if pr + rc else Fraction(0))
    acc = Fraction(sum(a == b for a, b in zip(t, p)), len(t))
    return acc, sum(rec) / 4, sum(prec) / 4, sum(f1) / 4


def test_perfect_prediction():
    y = [0, 1, 2, 3, 3, 2]
    cm = confusion(y, y)
    assert np.array_equal(cm.counts, np.diag([1, 1, 2, 2]))
    r = summarize(cm)
    assert (r.accuracy, r.macro_recall, r.macro_precision, r.macro_f1) == (1.0, 1.0, 1.0, 1.0)


def test_hand_example():
    r = evaluate(["Low", "Low", "Normal"], ["Low", "Normal", "Normal"])
    c = r.confusion.counts
    assert c[0, 0] == c[0, 1] == c[1, 1] == 1 and c.sum() == 3
    assert r.accuracy == pytest.approx(2 / 3)
    assert r.recall[:2].tolist() == [0.5, 1.0]
    assert r.precision[:2].tolist() == [1.0, 0.5]


def test_constant_high_collapse():
    y = np.array([0] * 79 + [1] * 78 + [2] * 78 + [3] * 75)
    r = evaluate(y, np.full(310, 3))
    assert r.confusion.counts[:, 3].sum() == 310 and r.confusion.counts[3, 3] == 75
    assert [pct(v) for v in (r.accuracy, r.macro_recall, r.macro_precision, r.macro_f1)] == \
        ["24.19", "25.00", "6.05", "9.74"]


@pytest.mark.parametrize("support", [1, 40, 75, 200])
def test_constant_predictor_formula(support):
    # a constant predictor of class c scores precision s/n, recall 1 for c and 0 elsewhere
    n = 310
    y = np.array([3] * support + [0] * (n - support))
    r = evaluate(y, np.full(n, 3))
    q = support / n
    assert r.accuracy == pytest.approx(q)
    assert r.macro_recall == pytest.approx(0.25)
    assert r.macro_precision == pytest.approx(q / 4)
    assert r.macro_f1 == pytest.approx(2 * q / (1 + q) / 4)


def test_errors():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])
    with pytest.raises(EmptyInput):
        confusion([], [])
    with pytest.raises(EmptyMatrix):
        summarize(ConfusionMatrix(np.zeros((4, 4), dtype=np.int64)))


def test_round_trip_dict():
    r = evaluate([0, 1, 2, 3, 1], [0, 2, 2, 3, 3])
    again = type(r).from_dict(r.to_dict())
    assert again.to_dict() == r.to_dict()


@pytest.mark.parametrize("value,text", [(0.060484, "6.05"), (0.241935, "24.19"), (0.00005, "0.01"),
                                        (0.12345, "12.35"), (1.0, "100.00")])
def test_pct_half_up(value, text):
    assert pct(value) == text


pairs = st.integers(1, 60).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                        st.lists(st.integers(0, 3), min_size=n, max_size=n)))


@settings(max_examples=300, deadline=None)
@given(pairs)
def test_matches_exact_reference(tp):
    t, p = tp
    r = evaluate(t, p)
    ref = fraction_metrics(t, p)
    got = (r.accuracy, r.macro_recall, r.macro_precision, r.macro_f1)
    for a, b in zip(got, ref):
        assert a == pytest.approx(float(b), abs=1e-12)
    assert np.all((0 <= r.f1) & (r.f1 <= 1))
    assert np.all(r.f1 <= np.maximum(r.precision, r.recall) + 1e-12)
    assert np.all(r.f1 >= np.minimum(r.precision, r.recall) - 1e-12)


@settings(max_examples=100, deadline=None)
@given(pairs, st.permutations([0, 1, 2, 3]))
def test_relabel_equivariance(tp, perm):
    t, p = tp
    a = evaluate(t, p)
    b = evaluate([perm[v] for v in t], [perm[v] for v in p])
    for key in ("accuracy", "macro_recall", "macro_precision", "macro_f1"):
        assert getattr(a, key) == pytest.approx(getattr(b, key), abs=1e-12)
    assert np.allclose(a.recall, b.recall[perm])
