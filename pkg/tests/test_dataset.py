import json

import numpy as np
import pytest

from earmetrics.dataset import (
    AGE_GROUP_LABELS,
    AgeGroup,
    SplitManifest,
    SubjectRecord,
    assign_age_group,
    ingest,
    split_counts,
    strata_for_task,
    stratified_split,
)
from earmetrics.errors import (
    DataError,
    DuplicateSubject,
    EmptyStratum,
    MalformedRow,
    MissingFile,
    Underage,
)

# Age-group x gender subject counts of the 338-subject study population.
STUDY_DISTRIBUTION = {
    "18-28": (35, 36),
    "29-38": (32, 43),
    "39-48": (27, 45),
    "49-58": (27, 33),
    "59-68+": (29, 31),
}

GROUP_AGES = {"18-28": 22, "29-38": 33, "39-48": 44, "49-58": 55, "59-68+": 66}


def study_shaped_records() -> list[SubjectRecord]:
    records = []
    i = 0
    for label, (n_female, n_male) in STUDY_DISTRIBUTION.items():
        for gender, count in (("female", n_female), ("male", n_male)):
            for _ in range(count):
                records.append(
                    SubjectRecord(f"s{i:04d}", GROUP_AGES[label], gender, f"img/s{i:04d}.png")
                )
                i += 1
    return records


# ---------------------------------------------------------------------------
# age groups

@pytest.mark.parametrize(
    "age,group",
    [(18, 0), (28, 0), (29, 1), (38, 1), (39, 2), (48, 2), (49, 3), (58, 3), (59, 4), (68, 4), (95, 4)],
)
def test_assign_age_group_boundaries(age, group):
    assert assign_age_group(age) == AgeGroup(group)


def test_assign_age_group_underage():
    with pytest.raises(Underage):
        assign_age_group(17)


def test_age_bins_partition_all_adult_ages():
    for age in range(18, 130):
        groups = [g for g in AgeGroup if assign_age_group(age) == g]
        assert len(groups) == 1


def test_group_labels():
    assert tuple(g.label for g in AgeGroup) == AGE_GROUP_LABELS


# ---------------------------------------------------------------------------
# stratified split

def test_split_counts_single_stratum_of_71():
    records = [SubjectRecord(f"a{i}", 22, "female", "x.png") for i in range(71)]
    # a single age stratum is not a valid age task; check the rule directly on gender
    records += [SubjectRecord(f"b{i}", 40, "male", "x.png") for i in range(10)]
    manifest = stratified_split(records, "gender", seed=1)
    counts = split_counts(manifest, records)
    assert counts["female"] == {"train": 50, "val": 7, "test": 14}


def test_split_reproduces_reference_age_rows():
    records = study_shaped_records()
    manifest = stratified_split(records, "age", seed=7)
    counts = split_counts(manifest, records)
    expected = {
        "18-28": (50, 7, 14),
        "29-38": (53, 7, 15),
        "39-48": (51, 7, 14),
        "49-58": (42, 6, 12),
        "59-68+": (42, 6, 12),
    }
    for label, (tr, va, te) in expected.items():
        assert counts[label] == {"train": tr, "val": va, "test": te}


def test_split_gender_flooring_and_override():
    records = study_shaped_records()
    manifest = stratified_split(records, "gender", seed=7)
    counts = split_counts(manifest, records)
    assert counts["female"] == {"train": 105, "val": 15, "test": 30}
    # flooring yields 37 male test subjects; the published 38 needs an override
    assert counts["male"] == {"train": 133, "val": 18, "test": 37}
    manifest = stratified_split(
        records, "gender", seed=7, counts_override={"male": (131, 19, 38)}
    )
    counts = split_counts(manifest, records)
    assert counts["male"] == {"train": 131, "val": 19, "test": 38}
    assert counts["female"] == {"train": 105, "val": 15, "test": 30}


def test_split_partition_property_over_seeds():
    records = study_shaped_records()
    all_ids = {r.subject_id for r in records}
    for seed in range(25):
        for task in ("age", "gender"):
            m = stratified_split(records, task, seed=seed)
            train, val, test = set(m.train), set(m.val), set(m.test)
            assert train | val | test == all_ids
            assert not (train & val) and not (train & test) and not (val & test)


def test_split_deterministic():
    records = study_shaped_records()
    a = stratified_split(records, "age", seed=123)
    b = stratified_split(records, "age", seed=123)
    assert a == b
    c = stratified_split(records, "age", seed=124)
    assert a != c


def test_split_empty_stratum():
    records = [SubjectRecord(f"a{i}", 22, "female", "x.png") for i in range(20)]
    with pytest.raises(EmptyStratum):
        stratified_split(records, "gender", seed=0)
    with pytest.raises(EmptyStratum):
        stratified_split(records, "age", seed=0)


def test_split_counts_override_must_sum():
    records = study_shaped_records()
    with pytest.raises(DataError):
        stratified_split(records, "gender", seed=0, counts_override={"male": (100, 10, 10)})


def test_manifest_rejects_overlap():
    with pytest.raises(DataError):
        SplitManifest("age", 0, ("a", "b"), ("b",), ("c",))


def test_manifest_json_roundtrip(tmp_path):
    records = study_shaped_records()
    manifest = stratified_split(records, "age", seed=9)
    path = tmp_path / "m.json"
    manifest.save(path)
    assert SplitManifest.load(path) == manifest
    obj = json.loads(path.read_text())
    assert set(obj) == {"task", "seed", "train", "val", "test"}


# ---------------------------------------------------------------------------
# ingest

def write_labels(tmp_path, rows, header="subject_id,age,gender,image"):
    path = tmp_path / "labels.csv"
    path.write_text("\n".join([header] + rows) + "\n")
    return path


def test_ingest_well_formed(tmp_path):
    for name in ("a.png", "b.png", "c.png"):
        (tmp_path / name).write_bytes(b"x")
    path = write_labels(
        tmp_path, ["s1,25,female,a.png", "s2,40,male,b.png", "s3,70,female,c.png"]
    )
    records = ingest(path, image_dir=tmp_path)
    assert len(records) == 3
    assert records[0].age_group == AgeGroup.G18_28
    assert records[2].age_group == AgeGroup.G59_PLUS


def test_ingest_duplicate_subject(tmp_path):
    path = write_labels(tmp_path, ["s1,25,female,a.png", "s1,30,male,b.png"])
    with pytest.raises(DuplicateSubject):
        ingest(path, check_files=False)


def test_ingest_missing_file_carries_row(tmp_path):
    path = write_labels(tmp_path, ["s1,25,female,nope.png"])
    with pytest.raises(MissingFile, match="row 2"):
        ingest(path, image_dir=tmp_path)


def test_ingest_malformed_age(tmp_path):
    path = write_labels(tmp_path, ["s1,twenty,female,a.png"])
    with pytest.raises(MalformedRow, match="row 2"):
        ingest(path, check_files=False)


def test_ingest_underage(tmp_path):
    path = write_labels(tmp_path, ["s1,17,female,a.png"])
    with pytest.raises(Underage):
        ingest(path, check_files=False)


def test_ingest_study_distribution(tmp_path):
    rows = []
    i = 0
    for label, (n_f, n_m) in STUDY_DISTRIBUTION.items():
        for gender, count in (("female", n_f), ("male", n_m)):
            for _ in range(count):
                rows.append(f"s{i:04d},{GROUP_AGES[label]},{gender},img.png")
                i += 1
    path = write_labels(tmp_path, rows)
    records = ingest(path, check_files=False)
    age_strata = strata_for_task(records, "age")
    assert [len(age_strata[l]) for l in AGE_GROUP_LABELS] == [71, 75, 72, 60, 60]
    gender_strata = strata_for_task(records, "gender")
    assert len(gender_strata["female"]) == 150
    assert len(gender_strata["male"]) == 188
