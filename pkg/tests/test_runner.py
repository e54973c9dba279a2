import csv
import dataclasses
import math
import threading

import pytest

from reqgrid.backend import HttpBackend, make_server
from reqgrid.config import EmbeddingConfig
from reqgrid.errors import BackendUnavailable, ConfigError, DesignError
from reqgrid.runner import (
    Corpus, ExperimentSetting, Factor, audit, load_results, make_backend, plan_grid, read_plan,
    read_predictions, run_grid, run_setting,
)
from reqgrid.analysis import analyze
from reqgrid.report import emit_report
from reqgrid.variations import VariationKind as V
from reqgrid.zsl import EmbeddingMode, Pipeline


class FailingBackend:
    """Delegates to a real backend, then fails once ``fail_at`` score requests were served."""

    def __init__(self, inner, fail_at):
        self.inner = inner
        self.fail_at = fail_at
        self.served = 0

    def score_many(self, reqs):
        if self.served + len(reqs) > self.fail_at:
            raise BackendUnavailable("simulated outage")
        self.served += len(reqs)
        return self.inner.score_many(reqs)

    def embed(self, texts):
        return self.inner.embed(texts)

    def close(self):
        pass


def _setting(task="Security", pattern="is-about-assertion", variation=V.PUNCT_STRIP, family="binary"):
    return ExperimentSetting("m1", Pipeline.INFERENCE, task, family, pattern, variation)


def test_plan_cardinalities(config_factory):
    cfg = config_factory()
    assert len(plan_grid(cfg, "binary")) == 90
    assert len(plan_grid(cfg, "multiclass")) == 60
    cfg3 = config_factory(models=("a", "b", "c"))
    assert len(plan_grid(cfg3)) == 450
    with_emb = config_factory(models=("a",), embedding=("e",))
    plan = plan_grid(with_emb)
    assert len(plan) == 155
    assert len(plan_grid(with_emb, pipeline="embedding")) == 5
    assert all(s.pattern is None and s.variation is None for s in plan[150:])


def test_plan_order(config_factory):
    plan = plan_grid(config_factory(models=("a", "b")))
    keys = [(s.model_id, s.task, s.pattern, s.variation.value) for s in plan]
    assert keys[0] == ("a", "Functional", "is-about-assertion", "punct-strip")
    assert keys[1] == ("a", "Functional", "is-about-assertion", "sentence-complete")
    assert keys[5] == ("a", "Functional", "belongs-to-assertion", "punct-strip")
    assert keys[30][1] == "Quality" and keys[150][0] == "b"
    assert all(s.family == ("binary" if s.task in ("Functional", "Quality", "Security") else "multiclass")
               for s in plan)


def test_plan_errors(config_factory):
    with pytest.raises(ConfigError):
        plan_grid(config_factory(), family="ternary")
    with pytest.raises(ConfigError):
        plan_grid(config_factory(), pipeline="retrieval")


def test_setting_invariants():
    with pytest.raises(ConfigError):
        ExperimentSetting("m", Pipeline.INFERENCE, "Security", "binary")
    with pytest.raises(ConfigError):
        ExperimentSetting("m", Pipeline.EMBEDDING, "Security", "binary", "is-about-qa")
    s = ExperimentSetting("m/1", Pipeline.INFERENCE, "NFR-Top4", "multiclass", "is-about-qa", V.LABEL_UPPER)
    assert s.id == "m_1__NFR-Top4__is-about-qa__label-upper"
    assert s.level(Factor.VARIATION) == "label-upper" and s.level(Factor.MODEL) == "m/1"
    e = ExperimentSetting("e", Pipeline.EMBEDDING, "NFR", "multiclass")
    assert e.id == "e__NFR__embedding__none"


def test_security_call_count_and_rows(config_factory, tmp_path):
    cfg = config_factory()
    res = run_setting(_setting(), make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path)
    assert res.backend_calls == 510
    rows = read_predictions(res.predictions_path)
    assert len(rows) == 510
    assert list(rows[0]) == ["index", "requirement_id", "gold", "predicted", "score:sec",
                             "score:nonsec", "prob:sec", "prob:nonsec"]
    assert all(0 <= v <= 1 for v in res.report.weighted)


def test_per_class_contexts_need_more_calls(config_factory, tmp_path):
    cfg = config_factory()
    res = run_setting(_setting(pattern="is-about-qa"), make_backend(cfg.models[0], cfg), Corpus(cfg),
                      cfg, tmp_path)
    assert res.backend_calls == 1020


def test_probabilities_recorded(config_factory, tmp_path):
    cfg = config_factory()
    res = run_setting(_setting(task="NFR-Top4", family="multiclass"), make_backend(cfg.models[0], cfg),
                      Corpus(cfg), cfg, tmp_path)
    for row in read_predictions(res.predictions_path)[:20]:
        probs = [float(row[f"prob:{c}"]) for c in ("Usability", "Security", "Operational", "Performance")]
        assert abs(math.fsum(probs) - 1) < 1e-9
        scores = {c: float(row[f"score:{c}"]) for c in ("Usability", "Security", "Operational", "Performance")}
        assert row["predicted"] == max(scores, key=scores.get)


def test_run_setting_deterministic(config_factory, tmp_path):
    cfg = config_factory()
    s = _setting(variation=V.LABEL_CAPITALIZED)
    a = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path / "a")
    b = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path / "b")
    assert a.report == b.report
    assert a.predictions_path.read_bytes() == b.predictions_path.read_bytes()


def test_resume_after_failure_matches_uninterrupted(config_factory, tmp_path):
    cfg = config_factory()
    s = _setting()
    clean = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path / "clean")
    failing = FailingBackend(make_backend(cfg.models[0], cfg), fail_at=100)
    with pytest.raises(BackendUnavailable):
        run_setting(s, failing, Corpus(cfg), cfg, tmp_path / "crash")
    partial = tmp_path / "crash" / "predictions" / f"{s.id}.csv.partial"
    done = len(read_predictions(partial))
    assert 0 < done <= 100
    resumed = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path / "crash",
                          resume=True)
    assert resumed.backend_calls == 510 - done
    assert resumed.predictions_path.read_bytes() == clean.predictions_path.read_bytes()
    assert not partial.exists()


def test_resume_drops_torn_line(config_factory, tmp_path):
    cfg = config_factory()
    s = _setting()
    clean = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path / "clean")
    lines = clean.predictions_path.read_bytes().splitlines(keepends=True)
    pred_dir = tmp_path / "torn" / "predictions"
    pred_dir.mkdir(parents=True)
    (pred_dir / f"{s.id}.csv.partial").write_bytes(b"".join(lines[:42]) + lines[42][:10])
    resumed = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path / "torn",
                          resume=True)
    assert resumed.predictions_path.read_bytes() == clean.predictions_path.read_bytes()


def test_resume_reuses_finished_setting(config_factory, tmp_path):
    cfg = config_factory()
    s = _setting()
    run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path)
    again = run_setting(s, FailingBackend(None, 0), Corpus(cfg), cfg, tmp_path, resume=True)
    assert again.backend_calls == 0


def test_mismatched_predictions_detected(config_factory, tmp_path):
    cfg = config_factory()
    s = _setting()
    res = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path)
    text = res.predictions_path.read_text().splitlines()
    res.predictions_path.write_text("\n".join(text[:-1]) + "\n")
    with pytest.raises(DesignError):
        run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path, resume=True)


def test_embedding_setting(config_factory, tmp_path):
    cfg = config_factory(models=(), embedding=("e",))
    s = ExperimentSetting("e", Pipeline.EMBEDDING, "NFR", "multiclass")
    res = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path)
    assert res.backend_calls == 10 + math.ceil(369 / cfg.embedding.batch_size)
    assert len(read_predictions(res.predictions_path)) == 369


def test_embedding_threshold_mode_abstains(config_factory, tmp_path):
    cfg = dataclasses.replace(config_factory(models=(), embedding=("e",)),
                              embedding=EmbeddingConfig(EmbeddingMode.THRESHOLD, 0.99))
    s = ExperimentSetting("e", Pipeline.EMBEDDING, "Security", "binary")
    res = run_setting(s, make_backend(cfg.models[0], cfg), Corpus(cfg), cfg, tmp_path)
    rows = read_predictions(res.predictions_path)
    assert all(r["predicted"] == "<abstain>" for r in rows)
    assert res.report.weighted.recall == 0.0


def test_http_backend_gives_identical_predictions(config_factory, tmp_path):
    cfg = config_factory()
    mock = make_backend(cfg.models[0], cfg)
    server = make_server(mock)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    url = f"http://127.0.0.1:{server.server_address[1]}"
    s = _setting(task="NFR-Top4", pattern="belongs-to-definition", variation=V.LABEL_LOWER,
                 family="multiclass")
    try:
        local = run_setting(s, mock, Corpus(cfg), cfg, tmp_path / "local")
        client = HttpBackend(url, parallelism=4)
        remote = run_setting(s, client, Corpus(cfg), cfg, tmp_path / "remote")
        client.close()
    finally:
        server.shutdown()
        server.server_close()
    assert local.predictions_path.read_bytes() == remote.predictions_path.read_bytes()


def _small_cfg(config_factory, **kw):
    return config_factory(models=("a", "b"), embedding=("e",),
                          grid={"tasks": ["Security", "NFR-Top4"],
                                "patterns": ["is-about-assertion", "belongs-to-qa"],
                                "variations": ["punct-strip", "label-upper"]}, **kw)


def test_run_grid_plan_and_reload(config_factory, tmp_path):
    cfg = _small_cfg(config_factory)
    grid = run_grid(cfg, tmp_path)
    assert len(grid.results) == len(grid.planned) == 2 * 2 * 2 * 2 + 2
    plan = read_plan(tmp_path)
    assert [s for s, _ in plan] == grid.planned
    assert plan[0][1] == ("sec", "nonsec")
    reloaded = load_results(tmp_path)
    assert [r.report for r in reloaded] == [r.report for r in grid.results]


def test_audit_detects_tampering(config_factory, tmp_path):
    cfg = _small_cfg(config_factory)
    grid = run_grid(cfg, tmp_path)
    emit_report(grid.results, analyze(grid.results), tmp_path)
    assert audit(tmp_path) == []
    path = tmp_path / "results.csv"
    rows = list(csv.reader(path.open()))
    rows[1][-1] = repr(float(rows[1][-1]) + 1e-12)
    with path.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    problems = audit(tmp_path)
    assert len(problems) == 1 and rows[1][0] in problems[0]


def test_run_grid_resume_after_crash(config_factory, tmp_path):
    cfg = _small_cfg(config_factory)
    clean = run_grid(cfg, tmp_path / "clean")
    emit_report(clean.results, analyze(clean.results), tmp_path / "clean")

    inner = make_backend(cfg.models[1], cfg)
    with pytest.raises(BackendUnavailable):
        run_grid(cfg, tmp_path / "crash", backends={"b": FailingBackend(inner, fail_at=700)})
    assert (tmp_path / "crash" / "run_log.json").exists()
    resumed = run_grid(cfg, tmp_path / "crash", resume=True)
    emit_report(resumed.results, analyze(resumed.results), tmp_path / "crash")
    for name in ("results.csv", "stats_friedman.csv", "stats_wilcoxon.csv", "report.md",
                 "summary_model.csv", "plan.csv"):
        assert (tmp_path / "crash" / name).read_bytes() == (tmp_path / "clean" / name).read_bytes()
