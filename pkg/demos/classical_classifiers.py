#!/usr/bin/env python3
"""Walkthrough: the four classical classifiers on geometric features.

Generates the synthetic gendered population (scale gap tuned so the optimal
rule sits near 97% accuracy), splits it subject-independently with the
published 270/68 shape, and trains logistic regression, a 1000-tree random
forest, one-vs-one RBF SVMs at C=250, and the 3-hidden-layer network.
"""

import numpy as np

from earmetrics.dataset import SubjectRecord, stratified_split
from earmetrics.geometry import apply_normalizer, fit_normalizer
from earmetrics.synthetic import gendered_landmark_population
from earmetrics.tabular import (
    LabeledDataset,
    evaluate,
    train_forest,
    train_logreg,
    train_mlp,
    train_svm,
)

X, y, ids = gendered_landmark_population(338, seed=42)
records = [SubjectRecord(ids[i], 30, "male" if y[i] else "female", "img.png") for i in range(338)]
manifest = stratified_split(
    records, "gender", seed=7,
    counts_override={"male": (150, 0, 38), "female": (120, 0, 30)},
)
index = {sid: i for i, sid in enumerate(ids)}
train_idx = [index[s] for s in manifest.train]
test_idx = [index[s] for s in manifest.test]
print(f"subjects: {len(records)} -> train {len(train_idx)}, test {len(test_idx)} (subject-independent)")

stats = fit_normalizer(X[train_idx])
X_train = apply_normalizer(X[train_idx], stats)
X_test = apply_normalizer(X[test_idx], stats)
train_ds = LabeledDataset(X_train, y[train_idx], ["female", "male"])
test_ds = LabeledDataset(X_test, y[test_idx], ["female", "male"])

models = {
    "logistic regression": train_logreg(train_ds, l2_lambda=0.01),
    "random forest (1000 trees)": train_forest(train_ds, seed=1),
    "SVM (RBF, C=250, one-vs-one)": train_svm(train_ds, seed=1),
    "3-hidden-layer network": train_mlp(train_ds, epochs=500, lr=0.05, seed=1),
}

print(f"\n{'method':<30s} {'test accuracy':>13s}")
for name, model in models.items():
    report = evaluate(model, test_ds)
    print(f"{name:<30s} {report.accuracy:>12.1%}")
print("\n(the generator's class overlap caps the best possible rule near 97%)")
