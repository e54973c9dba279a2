import json
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_prf
from reqgrid.errors import DesignError
from reqgrid.metrics import (
    WEIGHTED_ROW, confusion, evaluate, f1_from_pr, per_class_prf, weighted_prf,
)
from reqgrid.zsl import ABSTAIN, Pipeline, Prediction


def test_confusion_tally():
    cm = confusion(["A", "B", "B"], ["A", "A", "B"], ["A", "B"])
    assert cm.counts.tolist() == [[1, 1], [0, 1]]
    assert cm.supports == {"A": 2, "B": 1} and cm.total == 3


def test_confusion_accepts_predictions():
    preds = [Prediction("r", {}, {}, "A", Pipeline.INFERENCE)]
    assert confusion(preds, ["A"], ["A", "B"]).counts.tolist() == [[1, 0], [0, 0]]


def test_confusion_errors():
    with pytest.raises(DesignError):
        confusion(["A"], ["A", "B"], ["A", "B"])
    with pytest.raises(DesignError):
        confusion(["A"], ["C"], ["A", "B"])
    with pytest.raises(DesignError):
        confusion(["C"], ["A"], ["A", "B"])


def test_per_class_hand_example():
    prf = per_class_prf(confusion(["A", "B", "B"], ["A", "A", "B"], ["A", "B"]))
    assert prf["A"] == (1.0, 0.5, pytest.approx(2 / 3, abs=1e-15))
    assert prf["B"] == (0.5, 1.0, pytest.approx(2 / 3, abs=1e-15))


@pytest.mark.parametrize("p,r,f1", [(0.5916, 0.2246, 0.3256), (0.6697, 0.9102, 0.7716),
                                    (0.6956, 0.6799, 0.6877)])
def test_table_f1_cells(p, r, f1):
    assert abs(f1_from_pr(p, r) - f1) <= 5e-5


def test_weighted_examples():
    w = weighted_prf({"sec": (0, 0, 0.3256), "non": (0, 0, 0.7716)}, {"sec": 187, "non": 323})
    assert abs(w.f1 - 0.6081) <= 5e-4
    w = weighted_prf({"a": (0.9,) * 3, "b": (0.6,) * 3, "c": (0.3,) * 3}, {"a": 10, "b": 30, "c": 60})
    assert abs(w.precision - 0.45) < 1e-12
    w = weighted_prf({"a": (0.2, 0.4, 0.6), "b": (0.4, 0.6, 0.8)}, {"a": 5, "b": 5})
    assert w == pytest.approx((0.3, 0.5, 0.7), abs=1e-15)
    with pytest.raises(DesignError):
        weighted_prf({"a": (1, 1, 1)}, {"a": 0})
    with pytest.raises(DesignError):
        weighted_prf({"a": (1, 1, 1)}, {"b": 1})


def test_degenerate_flags():
    rep = evaluate(["A", "A"], ["A", "A"], ["A", "B", "C"])
    assert rep.per_class["B"] == (0.0, 0.0, 0.0, 0)
    assert any("B: never predicted" in f for f in rep.flags)
    assert any("support 0" in f for f in rep.flags)


def test_abstain_counts_against_recall_only():
    rep = evaluate(["A", ABSTAIN, "B"], ["A", "A", "B"], ["A", "B"])
    assert rep.per_class["A"][:2] == (1.0, 0.5)
    assert rep.per_class["A"][3] == 2


def test_perfect_predictions_diagonal():
    golds = ["A", "B", "C", "A"]
    cm = confusion(golds, golds, ["A", "B", "C"])
    assert np.array_equal(cm.counts, np.diag([2, 1, 1]))
    assert evaluate(golds, golds, ["A", "B", "C"]).weighted == (1.0, 1.0, 1.0)


def test_serialization():
    rep = evaluate(["A", "B", "B"], ["A", "A", "B"], ["A", "B"])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "class,P,R,F1,support"
    assert lines[-1].startswith(WEIGHTED_ROW + ",") and lines[-1].endswith(",3")
    data = json.loads(rep.to_json())
    assert data["weighted"]["wF1"] == rep.weighted.f1


labels = st.sampled_from(["A", "B", "C", "D", "E"])


@given(st.lists(st.tuples(labels, labels), min_size=1, max_size=20))
def test_matches_oracle(pairs):
    preds, golds = zip(*pairs)
    classes = sorted(set(golds) | set(preds))
    rep = evaluate(list(preds), list(golds), classes)
    per, weighted = brute_prf(preds, golds, classes)
    for c in classes:
        assert rep.per_class[c] == pytest.approx(per[c], abs=1e-12)
    assert rep.weighted == pytest.approx(weighted, abs=1e-12)
    # micro-accuracy identity
    assert abs(rep.weighted.recall - sum(p == g for p, g in pairs) / len(pairs)) < 1e-12
    assert all(0 <= v <= 1 for v in rep.weighted)


@given(st.lists(st.tuples(labels, labels), min_size=1, max_size=20))
def test_conservation(pairs):
    preds, golds = zip(*pairs)
    classes = sorted(set(golds) | set(preds))
    cm = confusion(list(preds), list(golds), classes)
    assert cm.counts.sum() == len(golds)


def test_single_class_weighted_equals_class():
    rep = evaluate(["A", "A"], ["A", "A"], ["A"])
    assert rep.weighted == rep.per_class["A"][:3]


def test_random_instances_against_oracle():
    rng = random.Random(1)
    for _ in range(200):
        k = rng.randint(1, 5)
        classes = [f"c{i}" for i in range(k)]
        n = rng.randint(1, 20)
        golds = [rng.choice(classes) for _ in range(n)]
        preds = [rng.choice(classes) for _ in range(n)]
        per, weighted = brute_prf(preds, golds, classes)
        rep = evaluate(preds, golds, classes)
        assert rep.weighted == pytest.approx(weighted, abs=1e-12)
