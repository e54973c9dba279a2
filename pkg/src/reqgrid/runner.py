"""Plan and execute the factorial grid.

Run directory layout::

    plan.csv                      planned settings, in execution order
    predictions/<setting>.csv     one row per requirement (complete settings)
    predictions/<setting>.csv.partial   checkpoint of an interrupted setting
    results.csv, summary_*.csv, stats_*.csv, report.md   (see report.py)
    run_log.json                  wall times and backend call counts

Everything except run_log.json is a pure function of the config, the data
and the backend's answers.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .backend import HttpBackend, MockBackend, ScoreRequest
from .config import GridConfig, ModelConfig, dataset_schemes
from .corpus import BINARY, MULTICLASS, Requirement, TaskInstance, TaskSpec, load_dataset, materialize_task
from .errors import ConfigError, DesignError
from .metrics import MetricReport, evaluate
from .prompts import candidate_prompts
from .variations import VariationKind, apply_text_variation
from .zsl import LabelLexicon, Pipeline, classify_embedding, label_vector, predict_inference

log = logging.getLogger(__name__)

MEASURES = ("wP", "wR", "wF1")
FAMILIES = (BINARY, MULTICLASS)
SCORE_CHUNK = 32
_UNSAFE = re.compile(r"[^A-Za-z0-9._-]+")


class Factor(enum.Enum):
    MODEL = "model"
    PATTERN = "pattern"
    VARIATION = "variation"
    TASK = "task"


@dataclass(frozen=True)
class ExperimentSetting:
    model_id: str
    pipeline: Pipeline
    task: str
    family: str
    pattern: str | None = None
    variation: VariationKind | None = None

    def __post_init__(self):
        if self.pipeline is Pipeline.INFERENCE and self.pattern is None:
            raise ConfigError("inference settings need a prompt pattern")
        if self.pipeline is Pipeline.EMBEDDING and self.pattern is not None:
            raise ConfigError("embedding settings take no prompt pattern")

    @property
    def id(self) -> str:
        parts = [self.model_id, self.task, self.pattern or "embedding",
                 self.variation.value if self.variation else "none"]
        return "__".join(_UNSAFE.sub("_", p) for p in parts)

    def level(self, factor: Factor) -> str:
        if factor is Factor.MODEL:
            return self.model_id
        if factor is Factor.TASK:
            return self.task
        if factor is Factor.PATTERN:
            return self.pattern or ""
        return self.variation.value if self.variation else ""


@dataclass(frozen=True)
class ExperimentResult:
    setting: ExperimentSetting
    report: MetricReport
    predictions_path: Path
    wall_time: float = 0.0
    backend_calls: int = 0


def plan_grid(cfg: GridConfig, family: str = "all", pipeline: str = "all") -> list[ExperimentSetting]:
    """Cartesian product ordered by (model, task, pattern, variation).

    Inference models get every task x pattern x variation; embedding models
    get one setting per task with no pattern or variation.
    """
    if family not in ("all", *FAMILIES):
        raise ConfigError(f"unknown family {family!r}")
    if pipeline not in ("all", *(p.value for p in Pipeline)):
        raise ConfigError(f"unknown pipeline {pipeline!r}")
    settings = []
    for model in cfg.models:
        if pipeline != "all" and model.pipeline.value != pipeline:
            continue
        for spec in cfg.tasks.values():
            if family != "all" and spec.kind != family:
                continue
            if model.pipeline is Pipeline.EMBEDDING:
                settings.append(ExperimentSetting(model.alias, model.pipeline, spec.name, spec.kind))
                continue
            for pattern in cfg.patterns:
                for variation in cfg.variations:
                    settings.append(ExperimentSetting(model.alias, model.pipeline, spec.name,
                                                      spec.kind, pattern, variation))
    return settings


class Corpus:
    """Loads each dataset once and caches materialized tasks."""

    def __init__(self, cfg: GridConfig):
        self.cfg = cfg
        self._datasets: dict[str, list[Requirement]] = {}
        self._tasks: dict[str, TaskInstance] = {}

    def dataset(self, name: str) -> list[Requirement]:
        if name not in self._datasets:
            if name not in self.cfg.datasets:
                raise ConfigError(f"dataset {name!r} is not configured")
            self._datasets[name] = load_dataset(self.cfg.datasets[name], dataset_schemes(self.cfg, name))
        return self._datasets[name]

    def task(self, name: str) -> TaskInstance:
        if name not in self._tasks:
            spec = self.cfg.tasks[name]
            self._tasks[name] = materialize_task(self.dataset(spec.dataset), spec)
        return self._tasks[name]


def mock_label_terms(tasks: Mapping[str, TaskSpec], lexicon: LabelLexicon) -> dict[str, list[str]]:
    """Lexicon for the mock scorer, keyed by every display string a class can take."""
    terms: dict[str, list[str]] = {}
    for spec in tasks.values():
        for cls in spec.classes:
            if cls in lexicon.entries:
                for key in (cls, spec.display_name(cls)):
                    terms.setdefault(key, list(lexicon.entries[cls]))
    return terms


def make_backend(model: ModelConfig, cfg: GridConfig):
    if model.backend == "mock":
        return MockBackend(mock_label_terms(cfg.tasks, cfg.label_lexicon), dim=cfg.mock.dim,
                           seed=cfg.mock.seed if model.seed is None else model.seed)
    b = cfg.backend
    return HttpBackend(model.url or b.url, retries=b.retries, parallelism=b.parallelism,
                       timeout=b.timeout, backoff=b.backoff)


# -- prediction files ---------------------------------------------------------

def prediction_header(classes: Sequence[str]) -> list[str]:
    return ["index", "requirement_id", "gold", "predicted",
            *(f"score:{c}" for c in classes), *(f"prob:{c}" for c in classes)]


def _prediction_row(i: int, pred, gold: str, classes: Sequence[str]) -> list:
    return [i, pred.requirement_id, gold, pred.predicted,
            *(repr(pred.raw_scores[c]) for c in classes),
            *(repr(pred.probabilities[c]) for c in classes)]


def read_predictions(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _recover_partial(path: Path) -> int:
    """Drop a torn trailing line and return the number of complete data rows."""
    data = path.read_bytes()
    if not data.endswith(b"\n"):
        data = data[: data.rfind(b"\n") + 1]
        path.write_bytes(data)
    return max(0, data.count(b"\n") - 1)


def _text_for(req: Requirement, variation: VariationKind | None, punct_chars: str) -> str:
    if variation is not None and variation.is_text:
        return apply_text_variation(req.text, variation, punct_chars)
    return req.text


def _infer_chunk(reqs, task: TaskInstance, setting: ExperimentSetting, cfg: GridConfig, backend):
    spec = task.spec
    pattern = cfg.patterns[setting.pattern]
    label_var = setting.variation if setting.variation and setting.variation.is_label else None
    requests = []
    layout = []
    for req in reqs:
        text = _text_for(req, setting.variation, cfg.punct_chars)
        grouped: dict[str, list] = {}
        for cls, rp in candidate_prompts(task, req, pattern, label_var, cfg.definitions, text=text):
            grouped.setdefault(rp.context, []).append((cls, rp.continuation))
        entry = []
        for ctx, items in grouped.items():
            entry.append((len(requests), [cls for cls, _ in items]))
            requests.append(ScoreRequest(ctx, tuple(c for _, c in items), cfg.backend.normalize))
        layout.append(entry)
    responses = backend.score_many(requests)
    preds = []
    for req, entry in zip(reqs, layout):
        scores = {}
        for ri, classes in entry:
            scores.update(zip(classes, responses[ri].scores))
        preds.append(predict_inference(spec.kind, scores, spec.classes, spec.positive_class, req.id))
    return preds, len(requests)


def run_setting(setting: ExperimentSetting, backend, corpus: Corpus, cfg: GridConfig, out_dir,
                resume: bool = False) -> ExperimentResult:
    """Classify every requirement of the task and persist the predictions.

    Rows are appended to a ``.partial`` file as they complete; a backend
    failure leaves that file behind and ``resume=True`` continues from it.
    """
    task = corpus.task(setting.task)
    spec = task.spec
    classes = spec.classes
    pred_dir = Path(out_dir) / "predictions"
    pred_dir.mkdir(parents=True, exist_ok=True)
    final = pred_dir / f"{setting.id}.csv"
    partial = pred_dir / f"{setting.id}.csv.partial"
    started = time.perf_counter()
    calls = 0
    if not (resume and final.exists()):
        done = _recover_partial(partial) if resume and partial.exists() else 0
        if done == 0:
            with partial.open("w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerow(prediction_header(classes))
        else:
            log.info("%s: resuming after %d of %d requirements", setting.id, done, len(task))
        reqs = task.requirements
        with partial.open("a", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if setting.pipeline is Pipeline.EMBEDDING:
                embed = lambda texts: backend.embed(texts).vectors  # noqa: E731
                label_vecs = {c: label_vector(cfg.label_lexicon.terms(c), embed) for c in classes}
                calls += len(classes)
                step = cfg.embedding.batch_size
            else:
                step = SCORE_CHUNK
            for start in range(done, len(reqs), step):
                chunk = reqs[start:start + step]
                if setting.pipeline is Pipeline.EMBEDDING:
                    vecs = backend.embed([r.text for r in chunk]).vectors
                    calls += 1
                    preds = [classify_embedding(v, label_vecs, cfg.embedding.mode,
                                                cfg.embedding.threshold, r.id)
                             for r, v in zip(chunk, vecs)]
                else:
                    preds, n = _infer_chunk(chunk, task, setting, cfg, backend)
                    calls += n
                for offset, (req, pred) in enumerate(zip(chunk, preds)):
                    writer.writerow(_prediction_row(start + offset, pred, task.gold(req), classes))
                fh.flush()
        os.replace(partial, final)
    rows = read_predictions(final)
    ids = [r.id for r in task.requirements]
    if [row["requirement_id"] for row in rows] != ids:
        raise DesignError(f"{final}: predictions do not match the task's requirements")
    report = evaluate([row["predicted"] for row in rows], [row["gold"] for row in rows], classes)
    return ExperimentResult(setting, report, final, time.perf_counter() - started, calls)


# -- plan persistence ---------------------------------------------------------

PLAN_HEADER = ["setting_id", "model", "pipeline", "family", "task", "pattern", "variation", "classes"]


def write_plan(settings: Sequence[ExperimentSetting], cfg: GridConfig, out_dir) -> None:
    path = Path(out_dir) / "plan.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PLAN_HEADER)
        for s in settings:
            w.writerow([s.id, s.model_id, s.pipeline.value, s.family, s.task, s.pattern or "",
                        s.variation.value if s.variation else "",
                        json.dumps(list(cfg.tasks[s.task].classes))])


def read_plan(out_dir) -> list[tuple[ExperimentSetting, tuple[str, ...]]]:
    path = Path(out_dir) / "plan.csv"
    if not path.exists():
        raise ConfigError(f"{out_dir} has no plan.csv; is it a run directory?")
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            setting = ExperimentSetting(
                row["model"], Pipeline(row["pipeline"]), row["task"], row["family"],
                row["pattern"] or None, VariationKind(row["variation"]) if row["variation"] else None,
            )
            out.append((setting, tuple(json.loads(row["classes"]))))
    return out


def load_results(out_dir) -> list[ExperimentResult]:
    """Rebuild results for every completed setting from its predictions file."""
    out_dir = Path(out_dir)
    log_path = out_dir / "run_log.json"
    run_log = json.loads(log_path.read_text()) if log_path.exists() else {}
    results = []
    for setting, classes in read_plan(out_dir):
        path = out_dir / "predictions" / f"{setting.id}.csv"
        if not path.exists():
            continue
        rows = read_predictions(path)
        report = evaluate([r["predicted"] for r in rows], [r["gold"] for r in rows], classes)
        info = run_log.get(setting.id, {})
        results.append(ExperimentResult(setting, report, path, info.get("wall_time", 0.0),
                                        info.get("backend_calls", 0)))
    return results


def audit(out_dir) -> list[str]:
    """Compare every weighted score in results.csv with a recomputation from predictions."""
    out_dir = Path(out_dir)
    recomputed = {r.setting.id: r.report for r in load_results(out_dir)}
    problems = []
    with (out_dir / "results.csv").open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            report = recomputed.get(row["setting_id"])
            if report is None:
                problems.append(f"{row['setting_id']}: no predictions file")
                continue
            expected = report.measure(row["measure"])
            if float(row["value"]) != expected:
                problems.append(f"{row['setting_id']} {row['measure']}: results.csv has "
                                f"{row['value']}, predictions give {expected!r}")
    return problems


@dataclass
class GridRun:
    planned: list[ExperimentSetting]
    results: list[ExperimentResult]


def run_grid(cfg: GridConfig, out_dir, family: str = "all", pipeline: str = "all",
             resume: bool = False, backends: Mapping[str, object] | None = None,
             progress=None) -> GridRun:
    """Execute every planned setting in order; see ``run_setting`` for checkpoints."""
    out_dir = Path(out_dir)
    planned = plan_grid(cfg, family, pipeline)
    write_plan(planned, cfg, out_dir)
    corpus = Corpus(cfg)
    models = {m.alias: m for m in cfg.models}
    live = dict(backends or {})
    results = []
    try:
        for i, setting in enumerate(planned):
            if setting.model_id not in live:
                live[setting.model_id] = make_backend(models[setting.model_id], cfg)
            result = run_setting(setting, live[setting.model_id], corpus, cfg, out_dir, resume)
            results.append(result)
            if progress:
                progress(i + 1, len(planned), result)
    finally:
        for alias, b in live.items():
            if backends is None or alias not in backends:
                b.close()
        _write_run_log(out_dir, results)
    return GridRun(planned, results)


def _write_run_log(out_dir: Path, results: Sequence[ExperimentResult]) -> None:
    path = out_dir / "run_log.json"
    log_data = json.loads(path.read_text()) if path.exists() else {}
    for r in results:
        log_data[r.setting.id] = {"wall_time": r.wall_time, "backend_calls": r.backend_calls}
    path.write_text(json.dumps(log_data, indent=1, sort_keys=True))
