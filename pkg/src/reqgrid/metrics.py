"""Confusion matrices, per-class P/R/F1 and support-weighted averages.

Zero denominators give 0 plus a flag rather than NaN or an error. Abstentions
count against the gold class's recall and are outside every precision
denominator.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DesignError
from .zsl import ABSTAIN

WEIGHTED_ROW = "__weighted__"


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ConfusionMatrix:
    classes: tuple[str, ...]
    counts: np.ndarray  # rows = gold, columns = predicted
    abstain: np.ndarray | None = None

    @property
    def supports(self) -> dict[str, int]:
        rows = self.counts.sum(axis=1)
        if self.abstain is not None:
            rows = rows + self.abstain
        return {c: int(n) for c, n in zip(self.classes, rows)}

    @property
    def total(self) -> int:
        extra = int(self.abstain.sum()) if self.abstain is not None else 0
        return int(self.counts.sum()) + extra


def _label(p) -> str:
    return p if isinstance(p, str) else p.predicted


def confusion(preds: Sequence, golds: Sequence[str], classes: Sequence[str]) -> ConfusionMatrix:
    """Tally predictions (``Prediction`` objects or class names) against golds."""
    if len(preds) != len(golds):
        raise DesignError(f"{len(preds)} predictions for {len(golds)} gold labels")
    index = {c: i for i, c in enumerate(classes)}
    k = len(classes)
    counts = np.zeros((k, k), dtype=np.int64)
    abstain = np.zeros(k, dtype=np.int64)
    any_abstain = False
    for p, g in zip(preds, golds):
        if g not in index:
            raise DesignError(f"gold label {g!r} is not in the roster {list(classes)}")
        label = _label(p)
        if label == ABSTAIN:
            abstain[index[g]] += 1
            any_abstain = True
            continue
        if label not in index:
            raise DesignError(f"predicted label {label!r} is not in the roster")
        counts[index[g], index[label]] += 1
    return ConfusionMatrix(tuple(classes), counts, abstain if any_abstain else None)


def f1_from_pr(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def per_class_prf(cm: ConfusionMatrix, flags: list | None = None) -> dict[str, PRF]:
    flags = [] if flags is None else flags
    predicted = cm.counts.sum(axis=0)
    supports = cm.supports
    out = {}
    for i, c in enumerate(cm.classes):
        tp = int(cm.counts[i, i])
        if predicted[i] == 0:
            p = 0.0
            flags.append(f"{c}: never predicted, precision set to 0")
        else:
            p = tp / int(predicted[i])
        if supports[c] == 0:
            r = 0.0
            flags.append(f"{c}: support 0, recall set to 0")
        else:
            r = tp / supports[c]
        if p + r == 0:
            flags.append(f"{c}: precision + recall = 0, F1 set to 0")
        out[c] = PRF(p, r, f1_from_pr(p, r))
    return out


def weighted_prf(per_class: Mapping[str, Sequence[float]], supports: Mapping[str, int]) -> PRF:
    if set(per_class) != set(supports):
        raise DesignError("per-class scores and supports cover different classes")
    total = sum(supports.values())
    if total <= 0:
        raise DesignError("total support is zero")
    cols = []
    for j in range(3):
        cols.append(math.fsum(supports[c] * per_class[c][j] for c in per_class) / total)
    return PRF(*cols)


@dataclass(frozen=True)
class MetricReport:
    per_class: Mapping[str, tuple[float, float, float, int]]
    weighted: PRF
    flags: tuple[str, ...] = field(default_factory=tuple)

    def measure(self, name: str) -> float:
        return {"wP": self.weighted.precision, "wR": self.weighted.recall,
                "wF1": self.weighted.f1}[name]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "P", "R", "F1", "support"])
        for c, (p, r, f1, n) in self.per_class.items():
            w.writerow([c, repr(p), repr(r), repr(f1), n])
        total = sum(v[3] for v in self.per_class.values())
        w.writerow([WEIGHTED_ROW, *(repr(v) for v in self.weighted), total])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "per_class": {c: dict(zip(("P", "R", "F1", "support"), v))
                          for c, v in self.per_class.items()},
            "weighted": dict(zip(("wP", "wR", "wF1"), self.weighted)),
            "flags": list(self.flags),
        }, indent=2)


def metric_report(cm: ConfusionMatrix) -> MetricReport:
    flags: list[str] = []
    pcs = per_class_prf(cm, flags)
    supports = cm.supports
    weighted = weighted_prf(pcs, supports)
    return MetricReport({c: (*pcs[c], supports[c]) for c in cm.classes}, weighted, tuple(flags))


def evaluate(preds: Sequence, golds: Sequence[str], classes: Sequence[str]) -> MetricReport:
    return metric_report(confusion(preds, golds, classes))
