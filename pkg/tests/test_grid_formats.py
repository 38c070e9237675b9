"""Grid container, resampling, normalization, and SGRID/PNG I/O tests."""

import numpy as np
import pytest

from interseg.errors import IoError, ValidationError
from interseg.formats import (
    DTYPE_UINT8,
    load_image_bytes,
    mask_to_png_bytes,
    read_sgrid_bytes,
    write_sgrid_bytes,
)
from interseg.grid import (
    BinaryMask,
    BoundingBox,
    ScalarGrid,
    crop,
    embed,
    normalize,
    resample,
    resample_mask,
)


def test_scalar_grid_validation():
    with pytest.raises(ValidationError):
        ScalarGrid(np.zeros((2, 2, 2, 2)))
    with pytest.raises(ValidationError):
        ScalarGrid(np.array([[np.nan, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError):
        ScalarGrid(np.zeros((2, 2)), spacing=(0.0, 1.0))
    grid = ScalarGrid(np.zeros((2, 3)))
    assert grid.spacing == (1.0, 1.0)
    with pytest.raises(ValueError):
        grid.data[0, 0] = 1.0  # immutable view


def test_bounding_box_inclusive():
    box = BoundingBox((1, 2), (3, 4))
    assert box.shape() == (3, 3)
    assert box.contains((3, 4)) and not box.contains((4, 4))
    with pytest.raises(ValidationError):
        BoundingBox((2, 2), (1, 4))


def test_crop_embed_roundtrip():
    rng = np.random.default_rng(0)
    grid = ScalarGrid(rng.normal(size=(6, 7)))
    box = BoundingBox((1, 2), (4, 5))
    sub = crop(grid, box)
    assert sub.dims == (4, 4)
    back = embed(sub, box, grid.dims)
    np.testing.assert_array_equal(back.data[box.slices()], sub.data)
    assert back.data[0, 0] == 0.0


def test_resample_corner_aligned_ramp():
    # 1x4 ramp up to 1x7: end values preserved, interior linear
    grid = ScalarGrid(np.array([[0.0, 1.0, 2.0, 3.0]]))
    out = resample(grid, (1, 7))
    np.testing.assert_allclose(out.data[0], [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])


def test_resample_identity_and_spacing():
    rng = np.random.default_rng(1)
    grid = ScalarGrid(rng.normal(size=(5, 9)), spacing=(2.0, 1.0))
    same = resample(grid, (5, 9))
    np.testing.assert_array_equal(same.data, grid.data)
    half = resample(grid, (5, 5))
    assert half.spacing == (2.0, 2.0)  # (9-1)/(5-1) = 2x coarser along axis 1


def test_resample_preserves_extrema_bounds():
    rng = np.random.default_rng(2)
    grid = ScalarGrid(rng.normal(size=(17, 13)))
    out = resample(grid, (40, 8))
    assert out.data.min() >= grid.data.min() - 1e-12
    assert out.data.max() <= grid.data.max() + 1e-12


def test_resample_mask_threshold():
    grid = ScalarGrid(np.array([[0.0, 1.0, 1.0, 0.0]]))
    mask = resample_mask(grid, (1, 4), threshold=0.5)
    assert mask.data.tolist() == [[False, True, True, False]]
    with pytest.raises(ValidationError):
        resample_mask(grid, (1, 4), threshold=1.0)


def test_normalize():
    grid = ScalarGrid(np.array([[1.0, 2.0], [3.0, 4.0]]))
    out = normalize(grid)
    assert abs(out.data.mean()) < 1e-12
    np.testing.assert_allclose(out.data.std(), 1.0)
    flat = normalize(ScalarGrid(np.full((3, 3), 7.0)))
    assert np.all(flat.data == 0.0)


def test_sgrid_roundtrip_bit_exact():
    rng = np.random.default_rng(3)
    grid = ScalarGrid(
        rng.normal(size=(4, 5, 6)).astype(np.float32).astype(np.float64),
        spacing=(2.0, 0.5, 0.5),
    )
    raw = write_sgrid_bytes(grid)
    again = read_sgrid_bytes(raw)
    np.testing.assert_array_equal(again.data, grid.data)
    assert again.spacing == grid.spacing
    assert write_sgrid_bytes(again) == raw


def test_sgrid_mask_roundtrip():
    mask = BinaryMask(np.array([[True, False], [False, True]]))
    raw = write_sgrid_bytes(mask, DTYPE_UINT8)
    again = read_sgrid_bytes(raw)
    np.testing.assert_array_equal(again.data > 0.5, mask.data)


def test_sgrid_bad_magic_and_truncation():
    with pytest.raises(IoError, match="bad magic"):
        read_sgrid_bytes(b"NOPE" + b"\x00" * 32)
    good = write_sgrid_bytes(ScalarGrid(np.zeros((2, 2))))
    with pytest.raises(IoError, match="size mismatch"):
        read_sgrid_bytes(good[:-1])


def test_png_roundtrip_via_loader():
    mask = np.zeros((8, 8), dtype=bool)
    mask[2:5, 3:7] = True
    png = mask_to_png_bytes(mask)
    grid = load_image_bytes(png)
    np.testing.assert_array_equal(grid.data > 127, mask)
