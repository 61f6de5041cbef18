"""Subject records, age binning, and stratified subject-independent splits.

Each subject contributes exactly one ear image.  Splitting is performed per
stratum (age group or gender) so class proportions carry over, and always at
the subject level: augmented variants of an image inherit the subject's
assignment, which keeps train/val/test free of identity leakage.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    DuplicateSubject,
    EmptyStratum,
    MalformedRow,
    MissingFile,
    Underage,
)

GENDERS = ("female", "male")


class AgeGroup(enum.IntEnum):
    """Five age bins partitioning [18, inf); ages 69+ fall into the last bin."""

    G18_28 = 0
    G29_38 = 1
    G39_48 = 2
    G49_58 = 3
    G59_PLUS = 4

    @property
    def label(self) -> str:
        return AGE_GROUP_LABELS[self.value]


AGE_GROUP_LABELS = ("18-28", "29-38", "39-48", "49-58", "59-68+")


def assign_age_group(age: int) -> AgeGroup:
    """Map an age in years to its bin; raises Underage below 18."""
    if age < 18:
        raise Underage(age)
    if age <= 28:
        return AgeGroup.G18_28
    if age <= 38:
        return AgeGroup.G29_38
    if age <= 48:
        return AgeGroup.G39_48
    if age <= 58:
        return AgeGroup.G49_58
    return AgeGroup.G59_PLUS


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: str
    age: int
    gender: str
    image_path: str
    landmarks_path: str | None = None

    def __post_init__(self):
        if not self.subject_id:
            raise DataError("subject_id must be non-empty")
        if self.age < 18:
            raise Underage(self.age)
        if self.gender not in GENDERS:
            raise DataError(f"gender must be one of {GENDERS}, got {self.gender!r}")

    @property
    def age_group(self) -> AgeGroup:
        return assign_age_group(self.age)


def ingest(labels_csv, image_dir=None, check_files: bool = True) -> list[SubjectRecord]:
    """Read and validate the labels CSV (subject_id, age, gender, image[, landmarks]).

    Paths are resolved against ``image_dir`` when given.  Rows that fail
    validation raise with their 1-based line number; duplicated subject ids
    and references to missing files are errors, not warnings.
    """
    labels_csv = Path(labels_csv)
    records: list[SubjectRecord] = []
    seen: set[str] = set()
    with open(labels_csv, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"subject_id", "age", "gender", "image"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise MalformedRow(1, f"header must contain columns {sorted(required)}")
        for line_no, row in enumerate(reader, start=2):
            sid = (row.get("subject_id") or "").strip()
            if not sid:
                raise MalformedRow(line_no, "empty subject_id")
            if sid in seen:
                raise DuplicateSubject(sid)
            try:
                age = int(row["age"])
            except (TypeError, ValueError):
                raise MalformedRow(line_no, f"age is not an integer: {row.get('age')!r}")
            gender = (row.get("gender") or "").strip().lower()
            if gender not in GENDERS:
                raise MalformedRow(line_no, f"gender must be female or male, got {row.get('gender')!r}")
            image = (row.get("image") or "").strip()
            if not image:
                raise MalformedRow(line_no, "empty image path")
            landmarks = (row.get("landmarks") or "").strip() or None
            base = Path(image_dir) if image_dir is not None else labels_csv.parent
            image_path = str(base / image)
            landmarks_path = str(base / landmarks) if landmarks else None
            if check_files:
                if not Path(image_path).exists():
                    raise MissingFile(image_path, row=line_no)
                if landmarks_path and not Path(landmarks_path).exists():
                    raise MissingFile(landmarks_path, row=line_no)
            try:
                rec = SubjectRecord(sid, age, gender, image_path, landmarks_path)
            except Underage:
                raise
            seen.add(sid)
            records.append(rec)
    return records


@dataclass(frozen=True)
class SplitManifest:
    """Disjoint train/val/test subject-id sets for one task."""

    task: str
    seed: int
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def __post_init__(self):
        if self.task not in ("age", "gender"):
            raise DataError(f"task must be 'age' or 'gender', got {self.task!r}")
        sets = [set(self.train), set(self.val), set(self.test)]
        if sum(len(s) for s in sets) != len(self.train) + len(self.val) + len(self.test):
            raise DataError("duplicate subject ids inside a split set")
        if (sets[0] & sets[1]) or (sets[0] & sets[2]) or (sets[1] & sets[2]):
            raise DataError("split sets overlap: subject independence violated")

    def subset(self, name: str) -> tuple[str, ...]:
        if name not in ("train", "val", "test"):
            raise DataError(f"unknown subset {name!r}")
        return getattr(self, name)

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "seed": self.seed,
            "train": list(self.train),
            "val": list(self.val),
            "test": list(self.test),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SplitManifest":
        return cls(
            obj["task"],
            int(obj["seed"]),
            tuple(obj["train"]),
            tuple(obj["val"]),
            tuple(obj["test"]),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "SplitManifest":
        return cls.from_json(json.loads(Path(path).read_text()))


def strata_for_task(records: list[SubjectRecord], task: str) -> dict[str, list[SubjectRecord]]:
    if task == "age":
        strata = {label: [] for label in AGE_GROUP_LABELS}
        for rec in records:
            strata[rec.age_group.label].append(rec)
    elif task == "gender":
        strata = {g: [] for g in GENDERS}
        for rec in records:
            strata[rec.gender].append(rec)
    else:
        raise DataError(f"task must be 'age' or 'gender', got {task!r}")
    return strata


def stratified_split(
    records: list[SubjectRecord],
    task: str,
    seed: int,
    test_frac: float = 0.2,
    val_frac: float = 0.125,
    counts_override: dict[str, tuple[int, int, int]] | None = None,
) -> SplitManifest:
    """Subject-independent stratified split.

    Within each stratum, ``floor(test_frac * n)`` subjects go to test, then
    ``floor(val_frac * remainder)`` to validation, the rest to train; the
    assignment is a seed-determined uniform draw.  ``counts_override`` maps a
    stratum name to explicit (train, val, test) counts for protocols whose
    rounding differs from the flooring rule.
    """
    if not records:
        raise DataError("no records to split")
    if not (0 < test_frac < 1) or not (0 <= val_frac < 1):
        raise DataError("fractions must lie in (0, 1)")
    strata = strata_for_task(records, task)
    rng = np.random.default_rng(seed)
    train, val, test = [], [], []
    for name, members in strata.items():
        n = len(members)
        if n == 0:
            raise EmptyStratum(name)
        if counts_override and name in counts_override:
            n_train, n_val, n_test = counts_override[name]
            if n_train + n_val + n_test != n:
                raise DataError(
                    f"counts override for '{name}' sums to {n_train + n_val + n_test}, stratum has {n}"
                )
        else:
            n_test = int(test_frac * n)
            n_val = int(val_frac * (n - n_test))
            n_train = n - n_test - n_val
        ids = sorted(rec.subject_id for rec in members)
        order = rng.permutation(n)
        shuffled = [ids[i] for i in order]
        test.extend(shuffled[:n_test])
        val.extend(shuffled[n_test : n_test + n_val])
        train.extend(shuffled[n_test + n_val :])
    return SplitManifest(task, seed, tuple(sorted(train)), tuple(sorted(val)), tuple(sorted(test)))


def split_counts(manifest: SplitManifest, records: list[SubjectRecord]) -> dict[str, dict[str, int]]:
    """Per-stratum train/val/test counts of a manifest, for reporting."""
    by_id = {rec.subject_id: rec for rec in records}
    strata = strata_for_task(records, manifest.task)
    counts = {name: {"train": 0, "val": 0, "test": 0} for name in strata}
    for subset in ("train", "val", "test"):
        for sid in manifest.subset(subset):
            rec = by_id.get(sid)
            if rec is None:
                raise DataError(f"manifest references unknown subject {sid!r}")
            name = rec.age_group.label if manifest.task == "age" else rec.gender
            counts[name][subset] += 1
    return counts
