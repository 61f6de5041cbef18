#!/usr/bin/env python3
"""Walkthrough: age binning and the stratified subject-independent split.

Builds a population with the study's exact age-group and gender counts and
shows that the flooring split rule reproduces the published per-group rows,
plus the explicit-counts override for the one row it cannot produce.
"""

from earmetrics.dataset import (
    AGE_GROUP_LABELS,
    SubjectRecord,
    assign_age_group,
    split_counts,
    stratified_split,
)

DISTRIBUTION = {  # age group -> (female, male)
    "18-28": (35, 36),
    "29-38": (32, 43),
    "39-48": (27, 45),
    "49-58": (27, 33),
    "59-68+": (29, 31),
}
AGES = {"18-28": 25, "29-38": 33, "39-48": 44, "49-58": 55, "59-68+": 66}

records = []
i = 0
for label, (n_female, n_male) in DISTRIBUTION.items():
    for gender, count in (("female", n_female), ("male", n_male)):
        for _ in range(count):
            records.append(SubjectRecord(f"s{i:04d}", AGES[label], gender, "img.png"))
            i += 1
print(f"population: {len(records)} subjects; bins partition every adult age")
print("  e.g. 28 ->", assign_age_group(28).label, "| 29 ->", assign_age_group(29).label,
      "| 95 ->", assign_age_group(95).label)

manifest = stratified_split(records, "age", seed=7)
print(f"\nage task (seed {manifest.seed}), floor(0.2n) test then floor(0.125r) validation:")
print(f"{'group':<8s} {'train':>6s} {'val':>5s} {'test':>5s}")
for label, c in split_counts(manifest, records).items():
    print(f"{label:<8s} {c['train']:>6d} {c['val']:>5d} {c['test']:>5d}")

manifest = stratified_split(records, "gender", seed=7)
print("\ngender task with the flooring rule:")
for label, c in split_counts(manifest, records).items():
    print(f"{label:<8s} {c['train']:>6d} {c['val']:>5d} {c['test']:>5d}")

manifest = stratified_split(records, "gender", seed=7,
                            counts_override={"male": (131, 19, 38)})
print("\ngender task with the explicit male-row override (131/19/38):")
for label, c in split_counts(manifest, records).items():
    print(f"{label:<8s} {c['train']:>6d} {c['val']:>5d} {c['test']:>5d}")

sets = [set(manifest.train), set(manifest.val), set(manifest.test)]
assert not (sets[0] & sets[1]) and not (sets[0] & sets[2]) and not (sets[1] & sets[2])
print("\nno subject appears in more than one of train/val/test")
