"""Two-stage fine-tuning: adapt on a large in-domain set, then re-head and
train on the small target set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..augment import ImageBuffer
from ..errors import DataError, EmptyDataset, ShapeMismatch
from .network import CnnModel, SgdConfig, accuracy, replace_head, train


@dataclass
class CnnDataset:
    """Image batch in NCHW float64 scaled to [0, 1], with integer labels."""

    x: np.ndarray
    labels: np.ndarray
    class_names: list[str]

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 4:
            raise DataError(f"expected (n, c, h, w) images, got shape {x.shape}")
        if labels.shape != (x.shape[0],):
            raise DataError("labels length does not match images")
        if len(labels) and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise DataError("labels must index into class_names")
        self.x = x
        self.labels = labels

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


def images_to_batch(images: list[ImageBuffer]) -> np.ndarray:
    """Stack image buffers into an NCHW float64 batch scaled to [0, 1]."""
    if not images:
        raise EmptyDataset("no images to stack")
    arrs = [img.data.transpose(2, 0, 1).astype(np.float64) / 255.0 for img in images]
    return np.stack(arrs)


def two_stage_finetune(
    base: CnnModel,
    domain_ds: CnnDataset,
    target_ds: CnnDataset,
    cfg: SgdConfig,
    domain_epochs: int | None = None,
    target_epochs: int | None = None,
    val_ds: CnnDataset | None = None,
    log: list | None = None,
):
    """Stage 1 trains ``base`` on the domain set (head sized to its classes);
    stage 2 replaces the head for the target label space and trains on the
    target set.  Never interleaved.  Returns (model, report).

    The classifier head trains at ``cfg.last_layer_multiplier`` times the
    global rate in both stages.  With ``domain_epochs=0`` the result is
    bit-identical to single-stage training on the target set alone.
    """
    if domain_ds.n == 0:
        raise EmptyDataset("domain stage received no samples")
    if target_ds.n == 0:
        raise EmptyDataset("target stage received no samples")
    if base.num_classes != domain_ds.n_classes:
        raise ShapeMismatch(
            f"base head has {base.num_classes} outputs, domain set has {domain_ds.n_classes} classes"
        )
    model = base.clone()
    model.head.lr_mult = cfg.last_layer_multiplier
    domain_losses = train(model, domain_ds.x, domain_ds.labels, cfg,
                          epochs=domain_epochs, stage="domain", log=log)
    model = replace_head(model, target_ds.n_classes, seed=cfg.seed,
                         lr_multiplier=cfg.last_layer_multiplier)
    target_losses = train(model, target_ds.x, target_ds.labels, cfg,
                          epochs=target_epochs, stage="target", log=log)
    report = {
        "stage_losses": {"domain": domain_losses, "target": target_losses},
        "val_accuracy": None if val_ds is None else accuracy(model, val_ds.x, val_ds.labels),
    }
    return model, report
