import numpy as np
import pytest

from earmetrics.augment import ImageBuffer
from earmetrics.errors import SizeTooLarge
from earmetrics.tinycnn import center_crop, center_offset, five_crop, five_crop_offsets


def coordinate_image(side=256, channels=1) -> ImageBuffer:
    """Pixel value encodes its position, so crop contents pin their origin."""
    grid = (np.add.outer(np.arange(side) * 7, np.arange(side) * 13) % 251).astype(np.uint8)
    if channels == 3:
        grid = np.stack([grid, grid, grid], axis=2)
    return ImageBuffer(grid)


def test_offsets_for_227_on_256():
    assert five_crop_offsets(256, 256, 227) == [(0, 0), (0, 29), (29, 0), (29, 29), (14, 14)]


def test_offsets_for_224_on_256():
    assert center_offset(256, 224) == 16
    assert five_crop_offsets(256, 256, 224)[-1] == (16, 16)


def test_crops_are_exact_subrectangles():
    img = coordinate_image()
    for size in (224, 227):
        crops = five_crop(img, size)
        for crop, (r, c) in zip(crops, five_crop_offsets(256, 256, size)):
            assert crop.data.shape == (size, size, 1)
            assert np.array_equal(crop.data, img.data[r : r + size, c : c + size])


def test_center_crop_equals_fifth_five_crop_bit_exact():
    img = coordinate_image(channels=3)
    for size in (224, 227, 100):
        assert np.array_equal(center_crop(img, size).data, five_crop(img, size)[4].data)


def test_center_crop_identity_at_full_size():
    img = coordinate_image(side=64)
    out = center_crop(img, 64)
    assert np.array_equal(out.data, img.data)


def test_size_bounds():
    img = coordinate_image(side=64)
    with pytest.raises(SizeTooLarge):
        five_crop(img, 64)
    with pytest.raises(SizeTooLarge):
        five_crop(img, 0)
    with pytest.raises(SizeTooLarge):
        center_crop(img, 65)


def test_poisoned_border_never_leaks():
    # the real image sits inside a sentinel frame; crops of the inner image
    # must never contain the sentinel, proving no out-of-bounds reads
    sentinel = 255
    framed = np.full((260, 260), sentinel, dtype=np.uint8)
    inner = (np.add.outer(np.arange(256), np.arange(256)) % 200).astype(np.uint8)
    framed[2:258, 2:258] = inner
    img = ImageBuffer(framed[2:258, 2:258].copy())
    for size in (224, 227, 255):
        for crop in five_crop(img, size) + [center_crop(img, size)]:
            assert not np.any(crop.data == sentinel)
