"""Prompt patterns and their rendering into scoreable (context, continuation) pairs."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Mapping

from .corpus import Requirement, TaskInstance
from .errors import LexiconError, TemplateError
from .lexicons import DEFAULT_DEFINITIONS
from .variations import VariationKind, apply_label_variation

PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
KNOWN_PLACEHOLDERS = {"text", "label", "definition"}
YES = "Yes"


class Relation(enum.Enum):
    IS_ABOUT = "is-about"
    BELONGS_TO = "belongs-to"


class Family(enum.Enum):
    ASSERTION = "assertion"
    DEFINITION = "definition"
    QA = "qa"


class AnswerMode(enum.Enum):
    SPAN_LIKELIHOOD = "span"
    YES_TOKEN = "yes"


DEFAULT_TEMPLATES = {
    "is-about-assertion": 'This requirement: "{text}" is about {label}.',
    "belongs-to-assertion": 'This requirement: "{text}" belongs to {label}.',
    "is-about-definition": '{definition} Therefore, this requirement: "{text}" is about {label}.',
    "belongs-to-definition": '{definition} Therefore, this requirement: "{text}" belongs to {label}.',
    "is-about-qa": 'Is this requirement: "{text}" about {label}? Answer: ',
    "belongs-to-qa": 'Does this requirement: "{text}" belong to {label}? Answer: ',
}


@dataclass(frozen=True)
class PromptPattern:
    relation: Relation
    family: Family
    template: str

    def __post_init__(self):
        names = PLACEHOLDER.findall(self.template)
        unknown = set(names) - KNOWN_PLACEHOLDERS
        if unknown:
            raise TemplateError(f"{self.id}: unknown placeholders {sorted(unknown)}")
        for required in ("text", "label"):
            if names.count(required) != 1:
                raise TemplateError(f"{self.id}: template must contain {{{required}}} exactly once")
        if self.family is Family.DEFINITION and "definition" not in names:
            raise TemplateError(f"{self.id}: definition templates need {{definition}}")
        if self.family is not Family.QA and not self.template.endswith("{label}."):
            raise TemplateError(f"{self.id}: assertion-style templates must end with '{{label}}.'")

    @property
    def id(self) -> str:
        return f"{self.relation.value}-{self.family.value}"

    @property
    def answer_mode(self) -> AnswerMode:
        return AnswerMode.YES_TOKEN if self.family is Family.QA else AnswerMode.SPAN_LIKELIHOOD


@dataclass(frozen=True)
class DefinitionLexicon:
    entries: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_DEFINITIONS))

    def __post_init__(self):
        for cls, text in self.entries.items():
            if not text.strip().endswith("."):
                raise LexiconError(f"definition for {cls!r} must end with a period")

    def lookup(self, key: str) -> str:
        try:
            return self.entries[key]
        except KeyError:
            raise LexiconError(f"no definition for class {key!r}") from None

    def check_task(self, classes) -> None:
        missing = [c for c in classes if c not in self.entries]
        if missing:
            raise LexiconError(f"no definitions for classes {missing}")


@dataclass(frozen=True)
class RenderedPrompt:
    context: str
    continuation: str
    answer_mode: AnswerMode

    @property
    def full(self) -> str:
        return self.context + self.continuation


def parse_pattern_id(pattern_id: str) -> tuple[Relation, Family]:
    for rel in Relation:
        prefix = rel.value + "-"
        if pattern_id.startswith(prefix):
            try:
                return rel, Family(pattern_id[len(prefix):])
            except ValueError:
                break
    raise TemplateError(
        f"unknown pattern {pattern_id!r} (expected {{is-about|belongs-to}}-{{assertion|definition|qa}})"
    )


def canonical_patterns(overrides: Mapping[str, str] | None = None) -> dict[str, PromptPattern]:
    """The six relation x family patterns, in a fixed order."""
    templates = dict(DEFAULT_TEMPLATES)
    for key, tpl in (overrides or {}).items():
        parse_pattern_id(key)
        templates[key] = tpl
    patterns = {}
    for fam in Family:
        for rel in Relation:
            pid = f"{rel.value}-{fam.value}"
            patterns[pid] = PromptPattern(rel, fam, templates[pid])
    return patterns


def _fill(segment: str, values: Mapping[str, str]) -> str:
    def sub(m):
        name = m.group(1)
        if name not in values:
            raise TemplateError(f"placeholder {{{name}}} left unsubstituted")
        return values[name]

    return PLACEHOLDER.sub(sub, segment)


def render_prompt(
    pattern: PromptPattern,
    req_text: str,
    display_label: str,
    lexicon: DefinitionLexicon | None = None,
    definition_key: str | None = None,
) -> RenderedPrompt:
    """Instantiate ``pattern`` and split it at the label boundary.

    Assertion and definition prompts put everything up to the label in the
    context and score ``"<label>."`` as the continuation. Q/A prompts keep the
    whole question as context and score the literal answer ``"Yes"``.
    ``definition_key`` selects the lexicon entry (defaults to the label).
    """
    if not req_text or not display_label:
        raise TemplateError("requirement text and label must be non-empty")
    values = {"text": req_text, "label": display_label}
    if pattern.family is Family.DEFINITION:
        if lexicon is None:
            raise LexiconError(f"pattern {pattern.id} needs a definition lexicon")
        values["definition"] = lexicon.lookup(definition_key or display_label)
    if pattern.family is Family.QA:
        return RenderedPrompt(_fill(pattern.template, values), YES, AnswerMode.YES_TOKEN)
    cut = pattern.template.index("{label}")
    context = _fill(pattern.template[:cut], values)
    continuation = display_label + pattern.template[cut + len("{label}"):]
    return RenderedPrompt(context, continuation, AnswerMode.SPAN_LIKELIHOOD)


def candidate_prompts(
    task: TaskInstance,
    req: Requirement,
    pattern: PromptPattern,
    label_variation: VariationKind | None = None,
    lexicon: DefinitionLexicon | None = None,
    text: str | None = None,
) -> list[tuple[str, RenderedPrompt]]:
    """One rendered prompt per class, in roster order.

    ``text`` overrides the requirement text (used for text variations).
    """
    req_text = req.text if text is None else text
    out = []
    for cls in task.spec.classes:
        shown = task.spec.display_name(cls)
        if label_variation is not None:
            shown = apply_label_variation(shown, label_variation)
        out.append((cls, render_prompt(pattern, req_text, shown, lexicon, definition_key=cls)))
    return out
