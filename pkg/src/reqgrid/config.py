"""Experiment configuration, loaded from a single TOML file.

Minimal example::

    [datasets]
    promise = "data/promise.csv"
    functional_quality = "data/functional_quality.csv"
    secreq = "data/secreq.csv"

    [[models]]
    alias = "bloom"
    backend = "http"            # or "mock"
    url = "http://localhost:8000"

    [[models]]
    alias = "all-mini"
    pipeline = "embedding"
    backend = "mock"          # mock models may also set seed = <int>

Optional tables: ``[grid]`` (tasks/patterns/variations subsets), ``[backend]``
(url, retries, parallelism, timeout, backoff, normalize), ``[mock]`` (seed,
dim), ``[embedding]`` (mode, threshold, batch_size), ``[variations]``
(punct_chars), ``[output]`` (dir), ``[templates]``, ``[definitions]``,
``[lexicon]`` and ``[[tasks]]`` for user-defined tasks. ``prompts_file`` names
a second TOML file holding ``[templates]``/``[definitions]``/``[lexicon]``.
Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .corpus import DATASET_SCHEMES, TaskSpec, canonical_tasks
from .errors import ConfigError
from .lexicons import DEFAULT_DEFINITIONS, DEFAULT_LABEL_TERMS
from .prompts import DefinitionLexicon, PromptPattern, canonical_patterns
from .variations import CANONICAL_VARIATIONS, DEFAULT_PUNCT_CHARS, VariationKind, parse_variation
from .zsl import EmbeddingMode, LabelLexicon, Pipeline


@dataclass(frozen=True)
class ModelConfig:
    alias: str
    pipeline: Pipeline = Pipeline.INFERENCE
    backend: str = "mock"
    url: str | None = None
    seed: int | None = None  # mock only; defaults to [mock].seed


@dataclass(frozen=True)
class BackendConfig:
    url: str | None = None
    retries: int = 2
    parallelism: int = 4
    timeout: float = 30.0
    backoff: float = 0.5
    normalize: str = "mean"


@dataclass(frozen=True)
class MockConfig:
    seed: int = 0
    dim: int = 256


@dataclass(frozen=True)
class EmbeddingConfig:
    mode: EmbeddingMode = EmbeddingMode.ARGMAX
    threshold: float = 0.5
    batch_size: int = 64


@dataclass(frozen=True)
class GridConfig:
    models: tuple[ModelConfig, ...]
    datasets: Mapping[str, Path]
    tasks: Mapping[str, TaskSpec] = field(default_factory=canonical_tasks)
    patterns: Mapping[str, PromptPattern] = field(default_factory=canonical_patterns)
    variations: tuple[VariationKind, ...] = CANONICAL_VARIATIONS
    definitions: DefinitionLexicon = field(default_factory=DefinitionLexicon)
    label_lexicon: LabelLexicon = field(
        default_factory=lambda: LabelLexicon({k: list(v) for k, v in DEFAULT_LABEL_TERMS.items()}))
    punct_chars: str = DEFAULT_PUNCT_CHARS
    backend: BackendConfig = BackendConfig()
    mock: MockConfig = MockConfig()
    embedding: EmbeddingConfig = EmbeddingConfig()
    output_dir: Path | None = None

    def with_models(self, aliases, pipeline=Pipeline.INFERENCE, backend="mock") -> "GridConfig":
        return replace(self, models=tuple(ModelConfig(a, pipeline, backend) for a in aliases))


def _enum(cls, value, what):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"unknown {what} {value!r} (choices: {choices})") from None


def _table(raw: Mapping, key: str) -> dict:
    value = raw.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{key}] must be a table")
    return value


def _select(available: Mapping, names, what: str) -> dict:
    if names is None:
        return dict(available)
    out = {}
    for name in names:
        if name not in available:
            raise ConfigError(f"unknown {what} {name!r} (known: {', '.join(available)})")
        out[name] = available[name]
    return out


def _read_toml(path: Path) -> dict:
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_config(raw: Mapping[str, Any], base_dir: Path = Path(".")) -> GridConfig:
    base_dir = Path(base_dir)

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base_dir / p

    prompt_raw: dict = {}
    if "prompts_file" in raw:
        prompt_raw = _read_toml(resolve(raw["prompts_file"]))
    templates = {**_table(prompt_raw, "templates"), **_table(raw, "templates")}
    definitions = {**DEFAULT_DEFINITIONS, **_table(prompt_raw, "definitions"), **_table(raw, "definitions")}
    terms = {**DEFAULT_LABEL_TERMS, **_table(prompt_raw, "lexicon"), **_table(raw, "lexicon")}

    datasets = {name: resolve(p) for name, p in _table(raw, "datasets").items()}

    tasks = canonical_tasks()
    for t in raw.get("tasks", []):
        try:
            spec = TaskSpec(
                name=t["name"], kind=t["kind"], labeling_scheme=t["scheme"],
                classes=tuple(t["classes"]), positive_class=t.get("positive_class"),
                dataset=t["dataset"], display=dict(t.get("display", {})),
            )
        except KeyError as exc:
            raise ConfigError(f"[[tasks]] entry is missing {exc}") from None
        tasks[spec.name] = spec

    grid = _table(raw, "grid")
    models = []
    backend_raw = _table(raw, "backend")
    for m in raw.get("models", []):
        if "alias" not in m:
            raise ConfigError("[[models]] entry needs an alias")
        kind = m.get("backend", "mock")
        if kind not in ("mock", "http"):
            raise ConfigError(f"model {m['alias']!r}: backend must be 'mock' or 'http'")
        url = m.get("url", backend_raw.get("url"))
        if kind == "http" and not url:
            raise ConfigError(f"model {m['alias']!r}: http backend needs a url")
        seed = m.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise ConfigError(f"model {m['alias']!r}: seed must be an integer")
        models.append(ModelConfig(m["alias"], _enum(Pipeline, m.get("pipeline", "inference"), "pipeline"),
                                  kind, url, seed))
    if len({m.alias for m in models}) != len(models):
        raise ConfigError("model aliases must be unique")

    emb = _table(raw, "embedding")
    mock = _table(raw, "mock")
    out = _table(raw, "output")
    try:
        backend = BackendConfig(
            url=backend_raw.get("url"),
            retries=int(backend_raw.get("retries", 2)),
            parallelism=int(backend_raw.get("parallelism", 4)),
            timeout=float(backend_raw.get("timeout", 30.0)),
            backoff=float(backend_raw.get("backoff", 0.5)),
            normalize=backend_raw.get("normalize", "mean"),
        )
        embedding = EmbeddingConfig(
            mode=_enum(EmbeddingMode, emb.get("mode", "argmax"), "embedding mode"),
            threshold=float(emb.get("threshold", 0.5)),
            batch_size=int(emb.get("batch_size", 64)),
        )
        mock_cfg = MockConfig(seed=int(mock.get("seed", 0)), dim=int(mock.get("dim", 256)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric config value: {exc}") from None
    if backend.normalize not in ("mean", "sum"):
        raise ConfigError("backend.normalize must be 'mean' or 'sum'")

    cfg = GridConfig(
        models=tuple(models),
        datasets=datasets,
        tasks=_select(tasks, grid.get("tasks", list(canonical_tasks())), "task"),
        patterns=_select(canonical_patterns(templates), grid.get("patterns"), "pattern"),
        variations=tuple(parse_variation(v) for v in grid.get("variations", [v.value for v in VariationKind])),
        definitions=DefinitionLexicon(definitions),
        label_lexicon=LabelLexicon(terms),
        punct_chars=_table(raw, "variations").get("punct_chars", DEFAULT_PUNCT_CHARS),
        backend=backend,
        mock=mock_cfg,
        embedding=embedding,
        output_dir=resolve(out["dir"]) if "dir" in out else None,
    )
    validate(cfg)
    return cfg


def validate(cfg: GridConfig) -> None:
    for spec in cfg.tasks.values():
        if spec.dataset not in cfg.datasets:
            raise ConfigError(f"task {spec.name!r} needs dataset {spec.dataset!r}, not configured")
        if any(m.pipeline is Pipeline.EMBEDDING for m in cfg.models):
            cfg.label_lexicon.check_task(spec.classes)
        if any(p.family.value == "definition" for p in cfg.patterns.values()):
            cfg.definitions.check_task(spec.classes)


def load_config(path) -> GridConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    return parse_config(_read_toml(path), path.parent)


def dataset_schemes(cfg: GridConfig, dataset: str) -> tuple[str, ...]:
    schemes = {t.labeling_scheme for t in cfg.tasks.values() if t.dataset == dataset}
    known = DATASET_SCHEMES.get(dataset, ())
    return tuple(s for s in known if s in schemes) + tuple(sorted(schemes - set(known)))
