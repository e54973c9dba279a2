"""Write results, summaries and test outcomes as CSV plus a markdown report.

All files except run_log.json depend only on their inputs, so two runs over
the same predictions produce identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from .analysis import Analysis, Comparison, FactorSummary, FriedmanRow, format_p
from .runner import FAMILIES, MEASURES, ExperimentResult, Factor
from .zsl import Pipeline

RESULTS_HEADER = ["setting_id", "model", "pipeline", "family", "task", "pattern", "variation",
                  "measure", "value"]
SUMMARY_HEADER = ["family", "measure", "level", "avg", "max", "times_best", "contexts"]
FRIEDMAN_HEADER = ["family", "measure", "factor", "method", "statistic", "df", "p_value", "n", "sig"]
WILCOXON_HEADER = ["measure", "task", "comparison", "method", "statistic", "p_value", "n",
                   "sig", "setting_a", "setting_b", "groups"]


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _star(p: float) -> str:
    return "*" if p < 0.05 else ""


def results_rows(results: Sequence[ExperimentResult]):
    for r in results:
        s = r.setting
        for m in MEASURES:
            yield [s.id, s.model_id, s.pipeline.value, s.family, s.task, s.pattern or "",
                   s.variation.value if s.variation else "", m, repr(r.report.measure(m))]


def wilcoxon_rows(comparisons: Sequence[Comparison]):
    for c in comparisons:
        res = c.result
        yield [c.measure, c.task, f"{c.label_a} vs. {c.label_b}", res.method.value,
               repr(res.statistic), repr(res.p_value), res.n_effective, _star(res.p_value),
               c.setting_a, c.setting_b, len(c.group_sizes)]


def emit_report(results: Sequence[ExperimentResult], analysis: Analysis, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    path = out_dir / "results.csv"
    _write_csv(path, RESULTS_HEADER, results_rows(results))
    written.append(path)

    for factor in Factor:
        path = out_dir / f"summary_{factor.value}.csv"
        rows = []
        for s in analysis.summaries:
            if s.factor is factor:
                for lv, st in s.per_level.items():
                    rows.append([s.family, s.measure, lv, repr(st.avg), repr(st.max), st.times_best,
                                 s.contexts])
        _write_csv(path, SUMMARY_HEADER, rows)
        written.append(path)

    path = out_dir / "stats_friedman.csv"
    _write_csv(path, FRIEDMAN_HEADER, [
        [f.family, f.measure, f.factor.value, f.result.method.value, repr(f.result.statistic),
         f.result.df, repr(f.result.p_value), f.result.n_effective, _star(f.result.p_value)]
        for f in analysis.friedman
    ])
    written.append(path)

    path = out_dir / "stats_wilcoxon.csv"
    _write_csv(path, WILCOXON_HEADER, wilcoxon_rows(analysis.comparisons))
    written.append(path)

    path = out_dir / "report.md"
    path.write_text(render_markdown(results, analysis), encoding="utf-8")
    written.append(path)
    return written


def _md_table(header, rows) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return lines


def _factor_table(family: str, factor: Factor, summaries: Sequence[FactorSummary]) -> list[str]:
    by_measure = {s.measure: s for s in summaries if s.family == family and s.factor is factor}
    if not by_measure:
        return []
    first = next(iter(by_measure.values()))
    header = [factor.value]
    for m in MEASURES:
        header += [f"{m} avg", f"{m} max", f"{m} best"]
    rows = []
    for lv in first.per_level:
        row = [lv]
        for m in MEASURES:
            st = by_measure[m].per_level[lv]
            row += [f"{st.avg:.4f}", f"{st.max:.4f}", st.times_best]
        rows.append(row)
    out = [f"### {family}: {factor.value} ({first.contexts} contexts)", ""]
    out += _md_table(header, rows)
    ties = sum(len(s.notes) for s in by_measure.values())
    if ties:
        out += ["", f"{ties} tied contexts credited to every tied level."]
    return out + [""]


def _friedman_table(family: str, rows: Sequence[FriedmanRow]) -> list[str]:
    mine = [r for r in rows if r.family == family]
    if not mine:
        return []
    table = []
    for factor in Factor:
        cells = {r.measure: r.result for r in mine if r.factor is factor}
        if cells:
            any_res = next(iter(cells.values()))
            table.append([factor.value, any_res.n_effective, any_res.df,
                          *(format_p(cells[m].p_value) if m in cells else "" for m in MEASURES)])
    out = [f"### Friedman tests, {family}", ""]
    out += _md_table(["factor", "blocks", "df", *MEASURES], table)
    return out + [""]


def render_markdown(results: Sequence[ExperimentResult], analysis: Analysis) -> str:
    lines = ["# Zero-shot classification grid report", ""]
    if not results:
        lines += ["## No settings run", "", "The plan was empty or no setting completed.", ""]
        return "\n".join(lines)

    inf = [r for r in results if r.setting.pipeline is Pipeline.INFERENCE]
    emb = [r for r in results if r.setting.pipeline is Pipeline.EMBEDDING]
    lines += [f"Settings completed: {len(results)} ({len(inf)} inference, {len(emb)} embedding).",
              "Significance marked by (*) at p < 0.05.", ""]

    for family in FAMILIES:
        if not any(r.setting.family == family for r in inf):
            continue
        lines += [f"## Factor summaries, {family} tasks", ""]
        for factor in Factor:
            lines += _factor_table(family, factor, analysis.summaries)
        lines += _friedman_table(family, analysis.friedman)

    if emb:
        lines += ["## Embedding baselines", ""]
        lines += _md_table(["model", "task", *MEASURES],
                           [[r.setting.model_id, r.setting.task,
                             *(f"{r.report.measure(m):.4f}" for m in MEASURES)] for r in emb])
        lines.append("")

    if analysis.comparisons:
        lines += ["## Best inference vs best embedding (Wilcoxon signed-rank)", ""]
        lines += _md_table(["measure", "task", "comparison", "p-value"],
                           [c.table_row() for c in analysis.comparisons])
        lines.append("")

    if analysis.notes:
        lines += ["## Notes", ""] + [f"- {n}" for n in analysis.notes] + [""]
    return "\n".join(lines)
