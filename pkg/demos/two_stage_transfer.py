#!/usr/bin/env python3
"""Walkthrough: two-stage fine-tuning versus training from scratch.

A reduced version of the transfer benchmark (one seed, a 3000-image domain
set) that still shows the effect: adapt a small convnet on a large
silhouette corpus, swap its classifier head for the 5-class target task,
fine-tune on 200 images, and compare with the identical model trained on
those 200 images alone.  Runs in roughly a minute on a laptop CPU.
"""

import time

import numpy as np

from earmetrics.synthetic import run_transfer_benchmark, silhouette_dataset
from earmetrics.tinycnn import CnnDataset

print("generating silhouettes (domain 3000 across 10 size classes, "
      "target 200 across 5, test 400)...")
domain_x, domain_y = silhouette_dataset(3000, 10, seed=101)
target_x, target_y = silhouette_dataset(200, 5, seed=202)
test_x, test_y = silhouette_dataset(400, 5, seed=303)
domain = CnnDataset(domain_x, domain_y, [f"fine{i}" for i in range(10)])
target = CnnDataset(target_x, target_y, [f"size{i}" for i in range(5)])

t0 = time.perf_counter()
staged, scratch = run_transfer_benchmark(
    seed=0, domain=domain, target=target, test_x=test_x, test_labels=test_y,
    global_lr=0.0001, head_multiplier=10.0, domain_epochs=8,
)
print(f"\nglobal lr 0.0001, classifier head at 10x, plain SGD ({time.perf_counter() - t0:.0f}s)")
print(f"  two-stage (domain then target): {staged:.1%} test accuracy")
print(f"  from scratch (target only):     {scratch:.1%} test accuracy")
print(f"  benefit: {100 * (staged - scratch):+.1f} points")
print("\nboth arms share the data, seed, and head initialization; the gap is")
print("what the domain-adapted convolution filters contribute.")
