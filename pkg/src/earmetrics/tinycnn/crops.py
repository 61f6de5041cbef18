"""Five-crop (train) and center-crop (test) pipelines over 8-bit images."""

from __future__ import annotations

import numpy as np

from ..augment import ImageBuffer
from ..errors import SizeTooLarge


def center_offset(canvas: int, size: int) -> int:
    return (canvas - size) // 2


def five_crop_offsets(height: int, width: int, size: int) -> list[tuple[int, int]]:
    """(row, col) origins: four corners then the center."""
    return [
        (0, 0),
        (0, width - size),
        (height - size, 0),
        (height - size, width - size),
        (center_offset(height, size), center_offset(width, size)),
    ]


def _crop(img: ImageBuffer, row: int, col: int, size: int) -> ImageBuffer:
    return ImageBuffer(img.data[row : row + size, col : col + size].copy())


def five_crop(img: ImageBuffer, size: int) -> list[ImageBuffer]:
    """Four corner crops plus the center crop, each size x size."""
    if size < 1 or size >= min(img.height, img.width):
        raise SizeTooLarge(
            f"five-crop size {size} must satisfy 1 <= size < {min(img.height, img.width)}"
        )
    return [_crop(img, r, c, size) for r, c in five_crop_offsets(img.height, img.width, size)]


def center_crop(img: ImageBuffer, size: int) -> ImageBuffer:
    """The single central size x size crop; size == canvas is the identity."""
    if size < 1 or size > min(img.height, img.width):
        raise SizeTooLarge(
            f"center-crop size {size} must satisfy 1 <= size <= {min(img.height, img.width)}"
        )
    return _crop(img, center_offset(img.height, size), center_offset(img.width, size), size)
