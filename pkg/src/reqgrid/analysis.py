"""Factor summaries, Friedman pivots and best-vs-best Wilcoxon comparisons."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DesignError
from .runner import FAMILIES, MEASURES, ExperimentResult, Factor, read_predictions
from .stats import StatTestResult, friedman_test, group_wf1, partition_groups, wilcoxon_signed_rank
from .zsl import Pipeline

FACTORS = tuple(Factor)


@dataclass(frozen=True)
class LevelStats:
    avg: float
    max: float
    times_best: int


@dataclass(frozen=True)
class FactorSummary:
    factor: Factor
    measure: str
    family: str
    per_level: dict[str, LevelStats]
    contexts: int
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Pivot:
    values: np.ndarray
    blocks: list[tuple[str, ...]]
    levels: list[str]


@dataclass(frozen=True)
class FriedmanRow:
    family: str
    factor: Factor
    measure: str
    result: StatTestResult


@dataclass(frozen=True)
class Comparison:
    task: str
    label_a: str
    label_b: str
    setting_a: str
    setting_b: str
    group_sizes: tuple[int, ...]
    wf1_a: tuple[float, ...]
    wf1_b: tuple[float, ...]
    result: StatTestResult
    measure: str = "wF1"

    def table_row(self) -> list[str]:
        """``measure, task, "A vs. B", p`` with a star when p < 0.05."""
        return [self.measure, self.task, f"{self.label_a} vs. {self.label_b}",
                format_p(self.result.p_value)]


def format_p(p: float) -> str:
    return f"{p:.4f}" + ("*" if p < 0.05 else "")


def _grid_results(results: Sequence[ExperimentResult], family: str | None) -> tuple[list, str]:
    rs = [r for r in results if r.setting.pipeline is Pipeline.INFERENCE]
    if family is not None:
        rs = [r for r in rs if r.setting.family == family]
    else:
        fams = {r.setting.family for r in rs}
        if len(fams) > 1:
            raise DesignError("results mix task families; pass family=")
        family = fams.pop() if fams else ""
    if not rs:
        raise DesignError(f"no inference results for family {family or '?'}")
    return rs, family


def _table(results, factor: Factor, measure: str):
    """Return (levels, contexts, cells) where cells[(context, level)] = value."""
    others = [f for f in FACTORS if f is not factor]
    levels: list[str] = []
    contexts: list[tuple[str, ...]] = []
    cells: dict = {}
    for r in results:
        lvl = r.setting.level(factor)
        ctx = tuple(r.setting.level(f) for f in others)
        if lvl not in levels:
            levels.append(lvl)
        if ctx not in contexts:
            contexts.append(ctx)
        if (ctx, lvl) in cells:
            raise DesignError(f"duplicate result for {ctx} at {factor.value}={lvl}")
        cells[(ctx, lvl)] = r.report.measure(measure)
    missing = [(c, lv) for c in contexts for lv in levels if (c, lv) not in cells]
    if missing:
        names = [f.value for f in others]
        shown = "; ".join(f"{dict(zip(names, c))} x {factor.value}={lv}" for c, lv in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        raise DesignError(f"incomplete grid, missing cells: {shown}{more}")
    return levels, contexts, cells


def summarize_factor(results: Sequence[ExperimentResult], factor: Factor, measure: str,
                     family: str | None = None) -> FactorSummary:
    """Average, maximum and times-best of each level of ``factor``.

    A context is one fixing of the other three factors. Every level tied for
    the best value in a context is credited, and a note records the tie.
    """
    rs, family = _grid_results(results, family)
    levels, contexts, cells = _table(rs, factor, measure)
    best = {lv: 0 for lv in levels}
    notes = []
    for ctx in contexts:
        row = [cells[(ctx, lv)] for lv in levels]
        top = max(row)
        winners = [lv for lv, v in zip(levels, row) if v == top]
        for lv in winners:
            best[lv] += 1
        if len(winners) > 1:
            notes.append(f"tie at {'/'.join(ctx)}: {', '.join(winners)}")
    per_level = {}
    for lv in levels:
        vals = [cells[(ctx, lv)] for ctx in contexts]
        per_level[lv] = LevelStats(math.fsum(vals) / len(vals), max(vals), best[lv])
    return FactorSummary(factor, measure, family, per_level, len(contexts), tuple(notes))


def pivot_for_friedman(results: Sequence[ExperimentResult], factor: Factor, measure: str,
                       family: str | None = None) -> Pivot:
    """Blocks are the other-factor combinations; columns are the levels of ``factor``."""
    rs, _ = _grid_results(results, family)
    levels, contexts, cells = _table(rs, factor, measure)
    values = np.array([[cells[(c, lv)] for lv in levels] for c in contexts], dtype=float)
    return Pivot(values, contexts, levels)


def friedman_rows(results: Sequence[ExperimentResult]) -> tuple[list[FriedmanRow], list[str]]:
    """Friedman test for every family x factor x measure the results support."""
    rows, notes = [], []
    for family in FAMILIES:
        if not any(r.setting.family == family and r.setting.pipeline is Pipeline.INFERENCE
                   for r in results):
            continue
        for factor in FACTORS:
            for measure in MEASURES:
                piv = pivot_for_friedman(results, factor, measure, family)
                n, k = piv.values.shape
                if n < 2 or k < 2:
                    notes.append(f"{family}/{factor.value}: {n} blocks x {k} levels, Friedman skipped")
                    break
                rows.append(FriedmanRow(family, factor, measure, friedman_test(piv.values)))
    return rows, notes


def summaries(results: Sequence[ExperimentResult]) -> list[FactorSummary]:
    out = []
    for family in FAMILIES:
        if any(r.setting.family == family and r.setting.pipeline is Pipeline.INFERENCE
               for r in results):
            for factor in FACTORS:
                for measure in MEASURES:
                    out.append(summarize_factor(results, factor, measure, family))
    return out


def best_result(results: Sequence[ExperimentResult], task: str) -> ExperimentResult:
    """Highest wF1 setting for ``task``; the earliest wins ties."""
    candidates = [r for r in results if r.setting.task == task]
    if not candidates:
        raise DesignError(f"no results for task {task!r}")
    best = candidates[0]
    for r in candidates[1:]:
        if r.report.weighted.f1 > best.report.weighted.f1:
            best = r
    return best


def compare_predictions(preds_a: Sequence[str], preds_b: Sequence[str], golds: Sequence[str],
                        roster: Sequence[str], group_sizes: Sequence[int] | None = None,
                        shuffle_seed: int | None = None):
    """Group-level wF1 for both prediction lists and the Wilcoxon test between them.

    Groups follow dataset order unless ``shuffle_seed`` is given, in which case
    the items are permuted (identically for both lists) before grouping.
    """
    if len(preds_a) != len(golds) or len(preds_b) != len(golds):
        raise DesignError("prediction lists and golds differ in length")
    if shuffle_seed is not None:
        order = list(range(len(golds)))
        random.Random(shuffle_seed).shuffle(order)
        preds_a = [preds_a[i] for i in order]
        preds_b = [preds_b[i] for i in order]
        golds = [golds[i] for i in order]
    sizes = list(group_sizes) if group_sizes is not None else partition_groups(len(golds))
    wa = group_wf1(preds_a, golds, sizes, roster)
    wb = group_wf1(preds_b, golds, sizes, roster)
    return sizes, wa, wb, wilcoxon_signed_rank(wa, wb)


def _label(r: ExperimentResult) -> str:
    return r.setting.model_id


def compare_best(results_a: Sequence[ExperimentResult], results_b: Sequence[ExperimentResult],
                 task: str, group_sizes: Sequence[int] | None = None,
                 shuffle_seed: int | None = None) -> Comparison:
    """Compare the best setting of each result set on ``task`` over identical groups."""
    a = best_result(results_a, task)
    b = best_result(results_b, task)
    rows_a = read_predictions(a.predictions_path)
    rows_b = read_predictions(b.predictions_path)
    if [r["requirement_id"] for r in rows_a] != [r["requirement_id"] for r in rows_b]:
        raise DesignError(f"{task}: the two prediction files cover different requirements")
    roster = list(a.report.per_class)
    golds = [r["gold"] for r in rows_a]
    sizes, wa, wb, res = compare_predictions([r["predicted"] for r in rows_a],
                                             [r["predicted"] for r in rows_b], golds, roster, group_sizes,
                                             shuffle_seed)
    return Comparison(task, _label(a), _label(b), a.setting.id, b.setting.id,
                      tuple(sizes), tuple(wa), tuple(wb), res)


def pipeline_comparisons(results: Sequence[ExperimentResult]) -> list[Comparison]:
    """Best inference setting vs best embedding setting, per task, when both exist."""
    inf = [r for r in results if r.setting.pipeline is Pipeline.INFERENCE]
    emb = [r for r in results if r.setting.pipeline is Pipeline.EMBEDDING]
    out = []
    tasks = []
    for r in results:
        if r.setting.task not in tasks:
            tasks.append(r.setting.task)
    for task in tasks:
        if any(r.setting.task == task for r in inf) and any(r.setting.task == task for r in emb):
            out.append(compare_best(inf, emb, task))
    return out


@dataclass
class Analysis:
    summaries: list[FactorSummary] = field(default_factory=list)
    friedman: list[FriedmanRow] = field(default_factory=list)
    comparisons: list[Comparison] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def analyze(results: Sequence[ExperimentResult]) -> Analysis:
    if not results:
        return Analysis()
    fr, notes = friedman_rows(results)
    return Analysis(summaries(results), fr, pipeline_comparisons(results), notes)
