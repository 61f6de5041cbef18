"""Small convolutional network: layers, SGD, crops, two-stage fine-tuning."""

from .crops import center_crop, center_offset, five_crop, five_crop_offsets
from .finetune import CnnDataset, images_to_batch, two_stage_finetune
from .layers import Conv, Dense, Dropout, Flatten, MaxPool, ReLU, Softmax
from .network import (
    ARCH_PRESETS,
    CnnModel,
    SgdConfig,
    accuracy,
    gradient_check,
    init_model,
    load_checkpoint,
    replace_head,
    save_checkpoint,
    sgd_step,
    train,
    train_step,
)

__all__ = [
    "ARCH_PRESETS",
    "CnnDataset",
    "CnnModel",
    "Conv",
    "Dense",
    "Dropout",
    "Flatten",
    "MaxPool",
    "ReLU",
    "SgdConfig",
    "Softmax",
    "accuracy",
    "center_crop",
    "center_offset",
    "five_crop",
    "five_crop_offsets",
    "gradient_check",
    "images_to_batch",
    "init_model",
    "load_checkpoint",
    "replace_head",
    "save_checkpoint",
    "sgd_step",
    "train",
    "train_step",
    "two_stage_finetune",
]
