from collections import Counter

import pytest
from hypothesis import given, strategies as st

from reqgrid.errors import VariationError
from reqgrid.variations import (
    DEFAULT_PUNCT_CHARS, VariationKind as V, apply_label_variation, apply_text_variation,
    parse_variation,
)

texts = st.text(alphabet=st.sampled_from(list("abcXYZ019 .,;:!?\"'()[]—-&é\t")), min_size=1, max_size=60)


def test_punct_strip_example():
    assert apply_text_variation("The system shall respond, quickly.", V.PUNCT_STRIP) == \
        "The system shall respond quickly"


def test_punct_strip_collapses_spaces():
    assert apply_text_variation("a , b (c) ", V.PUNCT_STRIP) == "a b c"


def test_sentence_complete_examples():
    assert apply_text_variation("The product shall be available", V.SENTENCE_COMPLETE) == \
        "The product shall be available."
    assert apply_text_variation("Is it secure?", V.SENTENCE_COMPLETE) == "Is it secure?"
    assert apply_text_variation("Stop!  ", V.SENTENCE_COMPLETE) == "Stop!"


def test_all_punctuation_is_error():
    with pytest.raises(VariationError):
        apply_text_variation("?!...", V.PUNCT_STRIP)


def test_custom_punct_set():
    assert apply_text_variation("a-b, c", V.PUNCT_STRIP, punct_chars="-") == "ab, c"


@pytest.mark.parametrize("kind,label,expected", [
    (V.LABEL_LOWER, "Fault Tolerance", "fault tolerance"),
    (V.LABEL_UPPER, "usability", "USABILITY"),
    (V.LABEL_CAPITALIZED, "look & feel", "Look & Feel"),
    (V.LABEL_CAPITALIZED, "non-functional", "Non-functional"),
    (V.LABEL_UPPER, "sécurité", "SéCURITé"),
])
def test_label_examples(kind, label, expected):
    assert apply_label_variation(label, kind) == expected


def test_kind_families():
    assert [k for k in V if k.is_text] == [V.PUNCT_STRIP, V.SENTENCE_COMPLETE]
    with pytest.raises(ValueError):
        apply_text_variation("x", V.LABEL_LOWER)
    with pytest.raises(ValueError):
        apply_label_variation("x", V.PUNCT_STRIP)


def test_parse_variation():
    assert parse_variation("label-upper") is V.LABEL_UPPER
    with pytest.raises(VariationError):
        parse_variation("shout")


def _alnum(s):
    return Counter(c for c in s if c.isalnum())


@given(texts)
def test_text_transforms_idempotent(t):
    for kind in (V.PUNCT_STRIP, V.SENTENCE_COMPLETE):
        try:
            once = apply_text_variation(t, kind)
        except VariationError:
            continue
        assert apply_text_variation(once, kind) == once


@given(texts)
def test_punct_strip_keeps_alphanumerics(t):
    try:
        out = apply_text_variation(t, V.PUNCT_STRIP)
    except VariationError:
        return
    assert _alnum(out) == _alnum(t)
    assert not any(c in DEFAULT_PUNCT_CHARS for c in out)


@given(texts)
def test_sentence_complete_terminal(t):
    try:
        out = apply_text_variation(t, V.SENTENCE_COMPLETE)
    except VariationError:
        return
    assert out[-1] in ".!?"


@given(texts)
def test_label_transforms_idempotent_and_length_preserving(t):
    for kind in (V.LABEL_LOWER, V.LABEL_UPPER, V.LABEL_CAPITALIZED):
        once = apply_label_variation(t, kind)
        assert len(once) == len(t)
        assert once.lower() == t.lower() or once.casefold() == t.casefold()
        assert apply_label_variation(once, kind) == once
