"""Deterministic image augmentation: 55 fixed variants per source image.

The default plan expands every image into one horizontal flip, 12 additive
and 10 multiplicative brightness changes, 7 Gaussian blur levels, 10 pixel
dropout rates and 15 unsharp-mask sharpening strengths.  Every transform is
a pure function of (image, parameters, seed), so re-running a plan
reproduces byte-identical outputs.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import DataError, InvalidTransformParam, UnreadableImage


@dataclass(frozen=True)
class ImageBuffer:
    """8-bit raster, row-major, shape (height, width, channels), 1 or 3 channels."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise DataError(f"expected (h, w) or (h, w, 1|3) image data, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            raise DataError(f"image data must be uint8, got {arr.dtype}")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def load(cls, path) -> "ImageBuffer":
        try:
            with Image.open(path) as im:
                im = im.convert("L") if im.mode in ("1", "L", "I;16", "I") else im.convert("RGB")
                arr = np.asarray(im, dtype=np.uint8)
        except (OSError, UnidentifiedImageError, ValueError) as exc:
            raise UnreadableImage(path) from exc
        return cls(arr)

    def save(self, path):
        arr = self.data[:, :, 0] if self.channels == 1 else self.data
        Image.fromarray(arr, mode="L" if self.channels == 1 else "RGB").save(
            path, format="PNG", compress_level=1
        )

    def __eq__(self, other):
        return isinstance(other, ImageBuffer) and np.array_equal(self.data, other.data)


# ---------------------------------------------------------------------------
# transforms


@dataclass(frozen=True)
class Flip:
    """Horizontal mirror."""

    @property
    def transform_id(self) -> str:
        return "flip"


@dataclass(frozen=True)
class BrightnessAdd:
    delta: int

    def __post_init__(self):
        if int(self.delta) != self.delta:
            raise InvalidTransformParam(f"brightness delta must be an integer, got {self.delta}")

    @property
    def transform_id(self) -> str:
        return f"badd_{self.delta:+d}"


@dataclass(frozen=True)
class BrightnessMul:
    factor: float

    def __post_init__(self):
        if self.factor <= 0:
            raise InvalidTransformParam(f"brightness factor must be > 0, got {self.factor}")

    @property
    def transform_id(self) -> str:
        return f"bmul_{self.factor:.2f}"


@dataclass(frozen=True)
class GaussianBlur:
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidTransformParam(f"blur sigma must be > 0, got {self.sigma}")

    @property
    def transform_id(self) -> str:
        return f"blur_{self.sigma:.2f}"


@dataclass(frozen=True)
class PixelDropout:
    p: float
    seed: int

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise InvalidTransformParam(f"dropout probability must lie in (0, 1), got {self.p}")

    @property
    def transform_id(self) -> str:
        return f"drop_{self.p:.2f}"


@dataclass(frozen=True)
class Sharpen:
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidTransformParam(f"sharpen alpha must be > 0, got {self.alpha}")

    @property
    def transform_id(self) -> str:
        return f"sharp_{self.alpha:.2f}"


Transform = Flip | BrightnessAdd | BrightnessMul | GaussianBlur | PixelDropout | Sharpen

BLUR_SIGMAS = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0)


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Discrete Gaussian of radius ceil(3*sigma), normalized to sum 1."""
    radius = math.ceil(3 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=float)
    kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _blur_float(data: np.ndarray, sigma: float) -> np.ndarray:
    # separable convolution; 'nearest' replicates edge pixels
    kernel = gaussian_kernel1d(sigma)
    out = ndimage.correlate1d(data, kernel, axis=0, mode="nearest")
    return ndimage.correlate1d(out, kernel, axis=1, mode="nearest")


def _to_uint8(data: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(data), 0, 255).astype(np.uint8)


def apply(transform: Transform, img: ImageBuffer) -> ImageBuffer:
    """Apply one transform; output keeps the input's dimensions and channels."""
    data = img.data
    if isinstance(transform, Flip):
        out = data[:, ::-1, :].copy()
    elif isinstance(transform, BrightnessAdd):
        out = np.clip(data.astype(np.int16) + int(transform.delta), 0, 255).astype(np.uint8)
    elif isinstance(transform, BrightnessMul):
        out = _to_uint8(data.astype(np.float64) * transform.factor)
    elif isinstance(transform, GaussianBlur):
        out = _to_uint8(_blur_float(data.astype(np.float64), transform.sigma))
    elif isinstance(transform, PixelDropout):
        rng = np.random.default_rng(transform.seed)
        dropped = rng.random((img.height, img.width)) < transform.p
        out = data.copy()
        out[dropped] = 0
    elif isinstance(transform, Sharpen):
        f = data.astype(np.float64)
        out = _to_uint8(f + transform.alpha * (f - _blur_float(f, 1.0)))
    else:
        raise InvalidTransformParam(f"unknown transform: {transform!r}")
    return ImageBuffer(out)


@dataclass(frozen=True)
class AugmentationPlan:
    transforms: tuple
    name: str = "custom"

    def __len__(self):
        return len(self.transforms)

    def transform_ids(self) -> list[str]:
        return [t.transform_id for t in self.transforms]


def default_plan(master_seed: int) -> AugmentationPlan:
    """The 55-variant plan; dropout seeds are derived from ``master_seed``."""
    transforms: list[Transform] = [Flip()]
    transforms += [BrightnessAdd(d) for d in range(-55, 56, 10)]
    transforms += [BrightnessMul(round(0.5 + 0.1 * i, 1)) for i in range(11) if i != 5]
    transforms += [GaussianBlur(s) for s in BLUR_SIGMAS]
    drop_seeds = np.random.SeedSequence(master_seed).generate_state(10)
    transforms += [
        PixelDropout(round(0.01 * (i + 1), 2), int(drop_seeds[i])) for i in range(10)
    ]
    transforms += [Sharpen(round(0.5 + 0.1 * i, 1)) for i in range(16) if i != 5]
    plan = AugmentationPlan(tuple(transforms), name="default")
    ids = plan.transform_ids()
    assert len(plan) == 55 and len(set(ids)) == 55
    return plan


def augment_dataset(
    sources,
    plan: AugmentationPlan,
    out_dir,
    manifest_path=None,
    labels: dict | None = None,
) -> dict:
    """Write one output image per (source, transform) pair.

    ``sources`` is a list of image paths; ``labels`` optionally maps a source
    stem to (subject_id, label).  Outputs are named ``<stem>__<transform-id>.png``.
    Unreadable sources are skipped and recorded, not fatal.  Returns a summary
    with the manifest rows in canonical (source order, plan order) order.
    """
    if not sources:
        raise DataError("no source images given")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    skipped = []
    for src in sources:
        src = Path(src)
        stem = src.stem
        subject_id, label = (labels or {}).get(stem, (stem, ""))
        try:
            img = ImageBuffer.load(src)
        except UnreadableImage:
            warnings.warn(f"skipping unreadable image: {src}")
            skipped.append(str(src))
            continue
        for transform in plan.transforms:
            out_name = f"{stem}__{transform.transform_id}.png"
            apply(transform, img).save(out_dir / out_name)
            rows.append(
                {
                    "output_path": str(out_dir / out_name),
                    "source_path": str(src),
                    "transform_id": transform.transform_id,
                    "subject_id": subject_id,
                    "label": label,
                }
            )
    if manifest_path is not None:
        from ._io import atomic_write_text

        buf = io.StringIO()
        writer = csv.DictWriter(
            buf, fieldnames=["output_path", "source_path", "transform_id", "subject_id", "label"]
        )
        writer.writeheader()
        writer.writerows(rows)
        atomic_write_text(manifest_path, buf.getvalue())
    return {"count": len(rows), "rows": rows, "skipped": skipped}
