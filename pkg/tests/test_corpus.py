from collections import Counter

import pytest
from hypothesis import given, strategies as st

from reqgrid.corpus import (
    BINARY, MULTICLASS, NFR_CLASSES, Requirement, TaskSpec, canonical_tasks, load_dataset,
    materialize_task, write_dataset,
)
from reqgrid.errors import ConfigError, IntegrityError, RowError, SchemaError


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_promise_file_counts(data_dir):
    reqs = load_dataset(data_dir / "promise.csv", ["promise"])
    assert len(reqs) == 625
    counts = Counter(r.labels["promise"] for r in reqs)
    assert len(counts) == 12
    assert counts["Functional"] == 255 and counts["Portability"] == 1


def test_secreq_file_counts(data_dir):
    reqs = load_dataset(data_dir / "secreq.csv", ["secreq"])
    assert len(reqs) == 510
    assert Counter(r.labels["secreq"] for r in reqs) == {"sec": 187, "nonsec": 323}


def test_functional_quality_counts(data_dir):
    reqs = load_dataset(data_dir / "functional_quality.csv", ["functional", "quality"])
    assert len(reqs) == 956
    assert Counter(r.labels["quality"] for r in reqs) == {"Quality": 522, "NonQuality": 434}
    assert Counter(r.labels["functional"] for r in reqs)["NonFunctional"] == 387


def test_nfr_tasks_materialize(data_dir):
    reqs = load_dataset(data_dir / "promise.csv", ["promise"])
    tasks = canonical_tasks()
    nfr = materialize_task(reqs, tasks["NFR"])
    assert len(nfr) == 369
    assert "Portability" not in nfr.class_supports
    top4 = materialize_task(reqs, tasks["NFR-Top4"])
    assert len(top4) == 249
    assert dict(top4.class_supports) == {"Usability": 67, "Security": 66, "Operational": 62,
                                         "Performance": 54}
    assert sum(nfr.class_supports.values()) == len(nfr)


def test_materialize_preserves_order_and_is_idempotent(data_dir):
    reqs = load_dataset(data_dir / "promise.csv", ["promise"])
    spec = canonical_tasks()["NFR"]
    inst = materialize_task(reqs, spec)
    ids = [r.id for r in reqs if r.labels["promise"] in NFR_CLASSES]
    assert [r.id for r in inst.requirements] == ids
    again = materialize_task(inst.requirements, spec)
    assert again.requirements == inst.requirements
    assert again.class_supports == inst.class_supports


def test_empty_task_is_config_error(data_dir):
    reqs = load_dataset(data_dir / "secreq.csv", ["secreq"])
    spec = TaskSpec("X", BINARY, "secreq", ("a", "b"), positive_class="a")
    with pytest.raises(ConfigError):
        materialize_task(reqs, spec)


def test_binary_zero_support_warns():
    reqs = [Requirement("1", "p", "t", {"s": "a"})]
    inst = materialize_task(reqs, TaskSpec("X", BINARY, "s", ("a", "b"), positive_class="a"))
    assert inst.warnings and "support 0" in inst.warnings[0]


def test_header_only_file(tmp_path):
    p = _write(tmp_path / "d.csv", "id,project,text,promise\n")
    assert load_dataset(p, ["promise"]) == []


def test_missing_column_named(tmp_path):
    p = _write(tmp_path / "d.csv", "id,project,text\n1,p,hello\n")
    with pytest.raises(SchemaError, match="promise"):
        load_dataset(p, ["promise"])


def test_empty_text_reports_row(tmp_path):
    p = _write(tmp_path / "d.csv", 'id,project,text,promise\n1,p,ok,F\n2,p,"  ",F\n')
    with pytest.raises(RowError) as exc:
        load_dataset(p, ["promise"])
    assert exc.value.row == 3


def test_duplicate_id(tmp_path):
    p = _write(tmp_path / "d.csv", "id,project,text,promise\n1,p,a,F\n1,p,b,F\n")
    with pytest.raises(IntegrityError):
        load_dataset(p, ["promise"])


def test_labels_trimmed_not_casefolded(tmp_path):
    p = _write(tmp_path / "d.csv", "id,project,text,promise\n1,p,a, Usability \n2,p,b,usability\n")
    reqs = load_dataset(p, ["promise"])
    assert [r.labels["promise"] for r in reqs] == ["Usability", "usability"]
    inst = materialize_task(reqs, canonical_tasks()["NFR"])
    assert [r.id for r in inst.requirements] == ["1"]


@pytest.mark.parametrize("kwargs", [
    dict(kind=BINARY, classes=("a", "b", "c"), positive_class="a"),
    dict(kind=BINARY, classes=("a", "b"), positive_class="z"),
    dict(kind=MULTICLASS, classes=("a", "b")),
    dict(kind=MULTICLASS, classes=("a", "a", "b")),
    dict(kind="ternary", classes=("a", "b", "c")),
])
def test_taskspec_invariants(kwargs):
    with pytest.raises(ConfigError):
        TaskSpec("T", labeling_scheme="s", **kwargs)


_text = st.text(st.characters(blacklist_categories=("Cs", "Cc", "Zl", "Zp")), min_size=1, max_size=40) \
    .filter(lambda s: s.strip() == s and s)


@given(st.lists(st.tuples(_text, _text, st.sampled_from(["A", "B", "C"])), max_size=15))
def test_csv_round_trip(tmp_path_factory, rows):
    reqs = [Requirement(f"id{i}", proj, text, {"s": lab}) for i, (proj, text, lab) in enumerate(rows)]
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_dataset(path, reqs, ["s"])
    assert load_dataset(path, ["s"]) == reqs
