import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maskgen.morphology import dilate_binary, erode_binary, erode_gray
from oracles import dilate_loops, erode_loops, min_filter_loops


masks16 = arrays(np.uint8, (16, 16), elements=st.sampled_from([0, 255]))


def subset(a, b):
    return not np.any((a == 255) & (b != 255))


def complement(m):
    return np.where(m == 255, 0, 255).astype(np.uint8)


def test_gray_erosion_examples(rng):
    flat = np.full((6, 8), 91, np.uint8)
    assert np.array_equal(erode_gray(flat, 5), flat)
    img = rng.integers(0, 256, (5, 7)).astype(np.uint8)
    assert np.array_equal(erode_gray(img, 0), img)
    spike = np.full((5, 5), 100, np.uint8)
    spike[2, 2] = 200
    assert np.all(erode_gray(spike, 1) == 100)
    with pytest.raises(ValueError):
        erode_gray(img, -1)


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 9))), st.integers(0, 3))
def test_gray_erosion_matches_loops(img, n):
    assert np.array_equal(erode_gray(img, n), min_filter_loops(img, n))


def test_binary_examples():
    black = np.zeros((7, 7), np.uint8)
    for op in (erode_binary, dilate_binary):
        for n in (0, 1, 4):
            assert np.array_equal(op(black, n), black)
    white = np.full((5, 5), 255, np.uint8)
    eroded = erode_binary(white, 1)
    expected = np.zeros((5, 5), np.uint8)
    expected[1:4, 1:4] = 255
    assert np.array_equal(eroded, expected)

    dot = np.zeros((5, 5), np.uint8)
    dot[2, 2] = 255
    assert not erode_binary(dot, 1).any()
    grown = np.zeros((5, 5), np.uint8)
    grown[1:4, 1:4] = 255
    assert np.array_equal(dilate_binary(dot, 1), grown)

    corner = np.zeros((5, 5), np.uint8)
    corner[0, 0] = 255
    assert np.count_nonzero(dilate_binary(corner, 1)) == 4


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=st.sampled_from([0, 255])),
       st.integers(0, 3))
def test_binary_matches_loops(mask, n):
    assert np.array_equal(erode_binary(mask, n), erode_loops(mask, n))
    assert np.array_equal(dilate_binary(mask, n), dilate_loops(mask, n))


@settings(max_examples=60, deadline=None)
@given(masks16, masks16, st.integers(1, 4), st.integers(0, 3))
def test_binary_algebra(m, other, n, k):
    assert subset(erode_binary(m, n), m)
    assert subset(m, dilate_binary(m, n))

    small = np.where((m == 255) & (other == 255), 255, 0).astype(np.uint8)
    assert subset(erode_binary(small, n), erode_binary(m, n))
    assert subset(dilate_binary(small, n), dilate_binary(m, n))

    assert np.array_equal(erode_binary(m, n + k), erode_binary(erode_binary(m, n), k))
    assert np.array_equal(dilate_binary(m, n + k), dilate_binary(dilate_binary(m, n), k))


@settings(max_examples=60, deadline=None)
@given(masks16, st.integers(1, 2))
def test_interior_duality(m, n):
    margin = 2 * n
    lhs = erode_binary(m, n)
    rhs = complement(dilate_binary(complement(m), n))
    inner = (slice(margin, -margin), slice(margin, -margin))
    assert np.array_equal(lhs[inner], rhs[inner])


def test_outputs_are_binary(rng):
    m = np.where(rng.random((30, 30)) > 0.4, 255, 0).astype(np.uint8)
    for out in (erode_binary(m, 2), dilate_binary(m, 3)):
        assert set(np.unique(out)) <= {0, 255}
        assert out.dtype == np.uint8
