"""The five dataset variations: two text transforms and three label casings."""

from __future__ import annotations

import enum
import re

from .errors import VariationError

DEFAULT_PUNCT_CHARS = ".,;:!?\"'()[]—"

_ASCII_LOWER = str.maketrans("ABCDEFGHIJKLMNOPQRSTUVWXYZ", "abcdefghijklmnopqrstuvwxyz")
_ASCII_UPPER = str.maketrans("abcdefghijklmnopqrstuvwxyz", "ABCDEFGHIJKLMNOPQRSTUVWXYZ")
_MULTI_SPACE = re.compile(r" {2,}")
_WORD = re.compile(r"\S+")


class VariationKind(enum.Enum):
    PUNCT_STRIP = "punct-strip"
    SENTENCE_COMPLETE = "sentence-complete"
    LABEL_LOWER = "label-lower"
    LABEL_UPPER = "label-upper"
    LABEL_CAPITALIZED = "label-capitalized"

    @property
    def is_text(self) -> bool:
        return self in (VariationKind.PUNCT_STRIP, VariationKind.SENTENCE_COMPLETE)

    @property
    def is_label(self) -> bool:
        return not self.is_text


CANONICAL_VARIATIONS = tuple(VariationKind)


def apply_text_variation(text: str, kind: VariationKind, punct_chars: str = DEFAULT_PUNCT_CHARS) -> str:
    if not kind.is_text:
        raise ValueError(f"{kind.value} is not a text variation")
    if not text.strip():
        raise VariationError("requirement text is empty")
    if kind is VariationKind.PUNCT_STRIP:
        stripped = text.translate({ord(c): None for c in punct_chars})
        out = _MULTI_SPACE.sub(" ", stripped).strip()
        if not out:
            raise VariationError(f"text {text!r} is empty after punctuation removal")
        return out
    out = text.rstrip()
    return out if out.endswith((".", "!", "?")) else out + "."


def _capitalize_word(m: re.Match) -> str:
    w = m.group(0)
    return w[0].translate(_ASCII_UPPER) + w[1:].translate(_ASCII_LOWER)


def apply_label_variation(label: str, kind: VariationKind) -> str:
    if kind is VariationKind.LABEL_LOWER:
        return label.translate(_ASCII_LOWER)
    if kind is VariationKind.LABEL_UPPER:
        return label.translate(_ASCII_UPPER)
    if kind is VariationKind.LABEL_CAPITALIZED:
        return _WORD.sub(_capitalize_word, label)
    raise ValueError(f"{kind.value} is not a label variation")


def parse_variation(name: str) -> VariationKind:
    try:
        return VariationKind(name)
    except ValueError:
        choices = ", ".join(v.value for v in VariationKind)
        raise VariationError(f"unknown variation {name!r} (choices: {choices})") from None
