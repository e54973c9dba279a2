"""Zero-shot classification: prompt-score (inference) and cosine (embedding) pipelines."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus import BINARY, MULTICLASS
from .errors import BackendInputError, ConfigError, LexiconError
from .lexicons import DEFAULT_LABEL_TERMS

ABSTAIN = "<abstain>"


class Pipeline(enum.Enum):
    INFERENCE = "inference"
    EMBEDDING = "embedding"


class EmbeddingMode(enum.Enum):
    ARGMAX = "argmax"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class Prediction:
    requirement_id: str
    raw_scores: Mapping[str, float]
    probabilities: Mapping[str, float]
    predicted: str
    pipeline: Pipeline


@dataclass(frozen=True)
class LabelLexicon:
    entries: Mapping[str, Sequence[str]]

    def __post_init__(self):
        for cls, terms in self.entries.items():
            if not terms or not all(t.strip() for t in terms):
                raise LexiconError(f"label lexicon for {cls!r} needs non-empty terms")

    def terms(self, cls: str) -> list[str]:
        try:
            return list(self.entries[cls])
        except KeyError:
            raise LexiconError(f"no label terms for class {cls!r}") from None

    def check_task(self, classes) -> None:
        missing = [c for c in classes if c not in self.entries]
        if missing:
            raise LexiconError(f"no label terms for classes {missing}")


def default_label_lexicon() -> LabelLexicon:
    return LabelLexicon({k: list(v) for k, v in DEFAULT_LABEL_TERMS.items()})


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def softmax(zs: Sequence[float]) -> list[float]:
    if len(zs) < 2:
        raise BackendInputError("softmax needs at least two logits")
    m = max(zs)
    exps = [math.exp(z - m) for z in zs]
    total = math.fsum(exps)
    return [e / total for e in exps]


def _argmax_first(values: Sequence[float]) -> int:
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def predict_inference(task_kind: str, class_scores: Mapping[str, float],
                      roster: Sequence[str] | None = None, positive_class: str | None = None,
                      requirement_id: str = "") -> Prediction:
    """Turn per-class prompt scores into a prediction.

    Binary tasks use the score difference z = s(positive) - s(other) with a
    sigmoid, which is exactly the two-class softmax. Ties go to the earliest
    class in the roster (the mapping order when no roster is given).
    """
    roster = list(class_scores) if roster is None else list(roster)
    missing = [c for c in roster if c not in class_scores]
    if missing:
        raise BackendInputError(f"missing scores for classes {missing}")
    scores = {c: float(class_scores[c]) for c in roster}
    if task_kind == BINARY:
        pos = positive_class if positive_class is not None else roster[0]
        other = roster[1] if roster[0] == pos else roster[0]
        z = scores[pos] - scores[other]
        probs = {pos: sigmoid(z), other: sigmoid(-z)}
        if z > 0:
            predicted = pos
        elif z < 0:
            predicted = other
        else:
            predicted = roster[0]
        probs = {c: probs[c] for c in roster}
    elif task_kind == MULTICLASS:
        p = softmax([scores[c] for c in roster])
        probs = dict(zip(roster, p))
        predicted = roster[_argmax_first([scores[c] for c in roster])]
    else:
        raise ConfigError(f"unknown task kind {task_kind!r}")
    return Prediction(requirement_id, scores, probs, predicted, Pipeline.INFERENCE)


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise BackendInputError(f"dimension mismatch {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise BackendInputError("cosine of a zero vector is undefined")
    return float(min(1.0, max(-1.0, np.dot(a, b) / (na * nb))))


def classify_embedding(req_vec, label_vecs: Mapping[str, Sequence[float]],
                       mode: EmbeddingMode = EmbeddingMode.ARGMAX, threshold: float | None = None,
                       requirement_id: str = "") -> Prediction:
    if mode is EmbeddingMode.THRESHOLD and threshold is None:
        raise ConfigError("threshold mode needs a threshold")
    classes = list(label_vecs)
    sims = {c: cosine(req_vec, label_vecs[c]) for c in classes}
    best = classes[_argmax_first([sims[c] for c in classes])]
    predicted = best
    if mode is EmbeddingMode.THRESHOLD and not sims[best] > threshold:
        predicted = ABSTAIN
    return Prediction(requirement_id, sims, dict(sims), predicted, Pipeline.EMBEDDING)


def label_vector(lexicon_terms: Sequence[str], embed: Callable[[list[str]], Sequence]) -> np.ndarray:
    """Mean of the term embeddings, L2-normalized.

    ``embed`` maps a list of strings to a list of vectors.
    """
    if not lexicon_terms:
        raise LexiconError("label lexicon has no terms")
    vecs = np.asarray(embed(list(lexicon_terms)), dtype=float)
    mean = vecs.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0:
        raise BackendInputError("label terms embed to a zero vector")
    return mean / norm
