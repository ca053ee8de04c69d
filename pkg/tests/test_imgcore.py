import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from maskgen.imgcore import (
    Box,
    DecodeError,
    DimensionMismatch,
    ImageIOError,
    abs_diff,
    binarize,
    fill_boxes,
    load_image,
    save_mask,
    to_gray,
    union,
)

gray_images = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)))


def masks(shape):
    return arrays(np.uint8, shape, elements=st.sampled_from([0, 255]))


def test_to_gray_black_and_white():
    assert np.all(to_gray(np.zeros((4, 5, 3), np.uint8)) == 0)
    assert np.all(to_gray(np.full((4, 5, 3), 255, np.uint8)) == 255)


def test_to_gray_weighted_sum():
    # 0.299*100 + 0.587*150 + 0.114*200 = 140.75
    assert to_gray(np.array([[[100, 150, 200]]], np.uint8))[0, 0] == 141


def test_to_gray_rounds_exact_halves_up():
    # search for an (R, 0, B) whose weighted sum ends in exactly .5
    for r in range(256):
        for b in range(256):
            if (299 * r + 114 * b) % 1000 == 500:
                got = to_gray(np.array([[[r, 0, b]]], np.uint8))[0, 0]
                assert got == (299 * r + 114 * b) // 1000 + 1
                return
    pytest.fail("no exact half found")


@given(arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(3))))
def test_to_gray_matches_float_formula_and_shape(img):
    gray = to_gray(img)
    assert gray.shape == img.shape[:2]
    expected = np.floor(0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2] + 0.5)
    # float evaluation can only disagree on exact halves, which differ by at most 1
    assert np.all(np.abs(gray.astype(int) - expected) <= 1)
    assert np.array_equal(gray, to_gray(img))


def test_abs_diff_examples():
    a = np.array([[10]], np.uint8)
    b = np.array([[200]], np.uint8)
    assert abs_diff(a, b)[0, 0] == 190
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    assert np.all(abs_diff(img, img) == 0)
    with pytest.raises(DimensionMismatch):
        abs_diff(np.zeros((3, 3), np.uint8), np.zeros((3, 4), np.uint8))


@given(gray_images, st.data())
def test_abs_diff_symmetric(a, data):
    b = data.draw(arrays(np.uint8, a.shape))
    assert np.array_equal(abs_diff(a, b), abs_diff(b, a))


def test_binarize_examples():
    assert binarize(np.array([[15]], np.uint8), 15)[0, 0] == 255
    assert binarize(np.array([[14]], np.uint8), 15)[0, 0] == 0
    assert np.all(binarize(np.zeros((3, 3), np.uint8), 0) == 255)
    with pytest.raises(ValueError):
        binarize(np.zeros((2, 2), np.uint8), 256)


@given(gray_images, st.integers(1, 254))
def test_binarize_values_and_monotone(img, t):
    lo, hi = binarize(img, t), binarize(img, t + 1)
    assert set(np.unique(lo)) <= {0, 255}
    assert np.count_nonzero(hi) <= np.count_nonzero(lo)


def test_union_examples():
    a = np.zeros((3, 3), np.uint8)
    b = np.zeros((3, 3), np.uint8)
    a[0, 0] = 255
    b[1, 1] = 255
    u = union(a, b)
    assert set(zip(*np.nonzero(u))) == {(0, 0), (1, 1)}
    with pytest.raises(DimensionMismatch):
        union(a, np.zeros((2, 3), np.uint8))


@settings(max_examples=50)
@given(st.data())
def test_union_algebra(data):
    shape = data.draw(st.tuples(st.integers(1, 8), st.integers(1, 8)))
    a, b, c = (data.draw(masks(shape)) for _ in range(3))
    black = np.zeros(shape, np.uint8)
    assert np.array_equal(union(a, black), a)
    assert np.array_equal(union(a, a), a)
    assert np.array_equal(union(a, b), union(b, a))
    assert np.array_equal(union(union(a, b), c), union(a, union(b, c)))


def test_fill_boxes():
    assert np.all(fill_boxes(10, 10, []) == 0)
    assert np.all(fill_boxes(10, 10, [Box(0, 0, 10, 10)]) == 255)
    # half-open: x in {2,3,4}, y in {2,3,4}
    assert np.count_nonzero(fill_boxes(10, 10, [Box(2, 2, 5, 5)])) == 9
    clipped = fill_boxes(4, 4, [Box(-3, 2, 2, 9), Box(10, 10, 20, 20)])
    assert np.count_nonzero(clipped) == 2 * 2


def test_mask_round_trip(tmp_path, rng):
    mask = np.where(rng.random((17, 23)) > 0.5, 255, 0).astype(np.uint8)
    path = tmp_path / "m.png"
    save_mask(mask, path)
    with Image.open(path) as im:
        assert im.mode == "L"
        assert im.format == "PNG"
    loaded = load_image(path)
    assert loaded.shape == (17, 23, 3)
    assert np.array_equal(loaded[..., 0], mask)
    assert np.array_equal(to_gray(loaded), mask)


def test_save_mask_rejects_gray_values(tmp_path):
    with pytest.raises(ValueError):
        save_mask(np.full((2, 2), 7, np.uint8), tmp_path / "bad.png")


def test_load_single_white_pixel(tmp_path):
    path = tmp_path / "w.png"
    Image.new("RGB", (1, 1), (255, 255, 255)).save(path)
    assert load_image(path).tolist() == [[[255, 255, 255]]]


def test_load_jpeg(tmp_path):
    path = tmp_path / "g.jpg"
    Image.new("L", (8, 6), 90).save(path, quality=95)
    img = load_image(path)
    assert img.shape == (6, 8, 3)
    assert np.all(img[..., 0] == img[..., 1])


def test_load_errors(tmp_path):
    with pytest.raises(ImageIOError):
        load_image(tmp_path / "missing.png")
    junk = tmp_path / "junk.png"
    junk.write_bytes(b"not an image at all")
    with pytest.raises(DecodeError):
        load_image(junk)
    good = tmp_path / "t.jpg"
    Image.new("RGB", (64, 64), (10, 200, 30)).save(good)
    truncated = tmp_path / "trunc.jpg"
    truncated.write_bytes(good.read_bytes()[:200])
    with pytest.raises(DecodeError):
        load_image(truncated)
    gif = tmp_path / "x.gif"
    Image.new("L", (2, 2)).save(gif)
    with pytest.raises(DecodeError):
        load_image(gif)
