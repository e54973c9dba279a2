"""Dataset ingestion and task materialization.

Datasets use one canonical CSV layout::

    id,project,text,<scheme1>[,<scheme2>...]

with one label column per labeling scheme. Class names are compared after
trimming surrounding whitespace, never case-folded.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, IntegrityError, RowError, SchemaError

log = logging.getLogger(__name__)

BASE_COLUMNS = ("id", "project", "text")

BINARY = "binary"
MULTICLASS = "multiclass"


@dataclass(frozen=True)
class Requirement:
    id: str
    project: str
    text: str
    labels: Mapping[str, str]


@dataclass(frozen=True)
class TaskSpec:
    """A classification task over one labeling scheme of one dataset.

    ``display`` maps a class identity to the surface string shown to
    classifiers; classes without an entry are shown as their own name.
    """

    name: str
    kind: str
    labeling_scheme: str
    classes: tuple[str, ...]
    positive_class: str | None = None
    dataset: str = ""
    display: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if len(set(self.classes)) != len(self.classes):
            raise ConfigError(f"task {self.name!r}: duplicate class names")
        if self.kind == BINARY:
            if len(self.classes) != 2:
                raise ConfigError(f"binary task {self.name!r} needs exactly 2 classes")
            if self.positive_class not in self.classes:
                raise ConfigError(
                    f"binary task {self.name!r}: positive class "
                    f"{self.positive_class!r} not in {self.classes}"
                )
        elif self.kind == MULTICLASS:
            if len(self.classes) < 3:
                raise ConfigError(f"multiclass task {self.name!r} needs >= 3 classes")
        else:
            raise ConfigError(f"task {self.name!r}: unknown kind {self.kind!r}")
        unknown = set(self.display) - set(self.classes)
        if unknown:
            raise ConfigError(f"task {self.name!r}: display names for unknown classes {sorted(unknown)}")

    @property
    def family(self) -> str:
        return self.kind

    def display_name(self, cls: str) -> str:
        return self.display.get(cls, cls)


@dataclass(frozen=True)
class TaskInstance:
    spec: TaskSpec
    requirements: tuple[Requirement, ...]
    class_supports: Mapping[str, int]
    warnings: tuple[str, ...] = ()

    def gold(self, req: Requirement) -> str:
        return req.labels[self.spec.labeling_scheme]

    @property
    def golds(self) -> list[str]:
        return [self.gold(r) for r in self.requirements]

    def __len__(self):
        return len(self.requirements)


def load_dataset(path, expected_schemes: Sequence[str]) -> list[Requirement]:
    """Read a canonical dataset CSV, preserving file order."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header required") from None
        for col in (*BASE_COLUMNS, *expected_schemes):
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        index = {name: i for i, name in enumerate(header)}
        reqs = []
        seen = set()
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise RowError(
                    f"{path}: row {line_no} has {len(row)} fields, expected {len(header)}",
                    row=line_no,
                )
            rid = row[index["id"]].strip()
            text = row[index["text"]].strip()
            if not rid:
                raise RowError(f"{path}: row {line_no} has an empty id", row=line_no)
            if not text:
                raise RowError(f"{path}: row {line_no} has an empty text field", row=line_no)
            if rid in seen:
                raise IntegrityError(f"{path}: duplicate id {rid!r} at row {line_no}")
            seen.add(rid)
            labels = {}
            for scheme in expected_schemes:
                value = row[index[scheme]].strip()
                if not value:
                    raise RowError(
                        f"{path}: row {line_no} has no label for scheme {scheme!r}", row=line_no
                    )
                labels[scheme] = value
            reqs.append(
                Requirement(id=rid, project=row[index["project"]].strip(), text=text, labels=labels)
            )
    return reqs


def write_dataset(path, reqs: Iterable[Requirement], schemes: Sequence[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*BASE_COLUMNS, *schemes])
        for r in reqs:
            writer.writerow([r.id, r.project, r.text, *(r.labels[s] for s in schemes)])


def materialize_task(reqs: Sequence[Requirement], spec: TaskSpec) -> TaskInstance:
    """Keep the requirements whose gold label is in the task roster."""
    scheme = spec.labeling_scheme
    roster = set(spec.classes)
    kept = []
    for r in reqs:
        if scheme not in r.labels:
            raise SchemaError(f"requirement {r.id!r} has no label for scheme {scheme!r}")
        if r.labels[scheme] in roster:
            kept.append(r)
    if not kept:
        raise ConfigError(
            f"task {spec.name!r}: no requirement carries any of the classes {list(spec.classes)}"
        )
    counts = Counter(r.labels[scheme] for r in kept)
    supports = {c: counts.get(c, 0) for c in spec.classes}
    warnings = []
    if spec.kind == BINARY:
        for c, n in supports.items():
            if n == 0:
                msg = f"task {spec.name!r}: class {c!r} has support 0"
                log.warning(msg)
                warnings.append(msg)
    return TaskInstance(spec=spec, requirements=tuple(kept), class_supports=supports,
                        warnings=tuple(warnings))


# Rosters of the five standard tasks. Portability (support 1 in PROMISE) is
# left out of the NFR roster rather than removed from the file.
NFR_CLASSES = (
    "Usability", "Security", "Operational", "Performance", "Look & Feel",
    "Availability", "Scalability", "Maintainability", "Legal", "Fault Tolerance",
)
NFR_TOP4_CLASSES = ("Usability", "Security", "Operational", "Performance")

DATASET_SCHEMES = {
    "promise": ("promise",),
    "functional_quality": ("functional", "quality"),
    "secreq": ("secreq",),
}


def canonical_tasks() -> dict[str, TaskSpec]:
    tasks = [
        TaskSpec("Functional", BINARY, "functional", ("Functional", "NonFunctional"),
                 positive_class="Functional", dataset="functional_quality",
                 display={"Functional": "functional", "NonFunctional": "non-functional"}),
        TaskSpec("Quality", BINARY, "quality", ("Quality", "NonQuality"),
                 positive_class="Quality", dataset="functional_quality",
                 display={"Quality": "quality", "NonQuality": "non-quality"}),
        TaskSpec("Security", BINARY, "secreq", ("sec", "nonsec"),
                 positive_class="sec", dataset="secreq",
                 display={"sec": "security", "nonsec": "non-security"}),
        TaskSpec("NFR", MULTICLASS, "promise", NFR_CLASSES, dataset="promise"),
        TaskSpec("NFR-Top4", MULTICLASS, "promise", NFR_TOP4_CLASSES, dataset="promise"),
    ]
    return {t.name: t for t in tasks}
