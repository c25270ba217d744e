import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabrec.raster import (BBox, BinaryImage, Component, GrayImage, binarize,
                           connected_components, dilate_binary, distance_transform,
                           iou, otsu_threshold, text_regions)

from .conftest import bboxes, binary_images, gray_images
from .oracles import (dilate_brute, distance_brute, flood_components, iou_pixel,
                      otsu_brute)


def gray(arr):
    return GrayImage(np.asarray(arr, dtype=np.uint8))


def binary(arr):
    return BinaryImage(np.asarray(arr, dtype=bool))


class TestBinarize:
    def test_all_white_otsu_is_all_background(self):
        assert binarize(gray(np.full((8, 8), 255)), "otsu").ink_count() == 0

    def test_all_black_fixed_128_is_all_foreground(self):
        assert binarize(gray(np.zeros((8, 8))), "fixed", 128).ink_count() == 64

    def test_half_black_half_white_splits_exactly(self):
        px = np.full((8, 8), 255)
        px[:, :4] = 0
        out = binarize(gray(px), "otsu")
        assert out.mask[:, :4].all() and not out.mask[:, 4:].any()
        assert otsu_threshold(gray(px)) == otsu_brute(px)

    def test_fixed_threshold_is_exclusive(self):
        px = np.full((2, 2), 100)
        assert binarize(gray(px), "fixed", 100).ink_count() == 0
        assert binarize(gray(px), "fixed", 101).ink_count() == 4

    @given(gray_images())
    @settings(max_examples=60, deadline=None)
    def test_otsu_matches_exhaustive_scan(self, img):
        assert otsu_threshold(img) == otsu_brute(img.pixels)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            binarize(gray(np.zeros((2, 2))), "adaptive")


class TestDilate:
    def test_zero_iterations_is_identity(self):
        m = np.zeros((5, 5), bool)
        m[2, 1] = True
        out = dilate_binary(binary(m), 3, 3, 0)
        assert np.array_equal(out.mask, m)

    def test_single_pixel_2x2(self):
        m = np.zeros((8, 8), bool)
        m[3, 3] = True
        out = dilate_binary(binary(m), 2, 2, 1)
        got = {(x, y) for y, x in zip(*np.nonzero(out.mask))}
        assert got == {(3, 3), (4, 3), (3, 4), (4, 4)}

    def test_corner_pixel_clips(self):
        m = np.zeros((8, 8), bool)
        m[7, 7] = True
        out = dilate_binary(binary(m), 2, 2, 1)
        assert out.ink_count() == 1 and out.mask[7, 7]

    @given(binary_images(max_side=10), st.integers(1, 3), st.integers(1, 3),
           st.integers(0, 2))
    @settings(max_examples=60, deadline=None)
    def test_matches_minkowski_oracle(self, img, kw, kh, iters):
        out = dilate_binary(img, kw, kh, iters)
        assert np.array_equal(out.mask, dilate_brute(img.mask, kw, kh, iters))

    @given(binary_images(max_side=12))
    @settings(max_examples=40, deadline=None)
    def test_extensive_and_composable(self, img):
        once = dilate_binary(img, 2, 2, 1)
        assert (once.mask | img.mask).sum() == once.ink_count()  # superset
        assert once.ink_count() >= img.ink_count()
        twice = dilate_binary(once, 2, 2, 1)
        assert np.array_equal(twice.mask, dilate_binary(img, 2, 2, 2).mask)


class TestConnectedComponents:
    def test_empty_foreground(self):
        assert connected_components(binary(np.zeros((4, 4), bool))) == []

    def test_diagonal_pixels_4_vs_8(self):
        m = np.zeros((4, 4), bool)
        m[0, 0] = m[1, 1] = True
        assert len(connected_components(binary(m), 4)) == 2
        assert len(connected_components(binary(m), 8)) == 1

    def test_solid_block(self):
        m = np.zeros((8, 8), bool)
        m[2:5, 2:5] = True
        comps = connected_components(binary(m), 8)
        assert len(comps) == 1
        assert comps[0].pixel_count == 9
        assert comps[0].bbox == BBox(2, 2, 5, 5)

    def test_labels_follow_raster_order(self):
        m = np.zeros((4, 8), bool)
        m[0, 6] = True   # first row, right
        m[1, 0] = True   # second row, left
        comps = connected_components(binary(m), 4)
        assert [c.label for c in comps] == [1, 2]
        assert comps[0].bbox.x0 == 6 and comps[1].bbox.x0 == 0

    @given(binary_images(max_side=12), st.sampled_from([4, 8]))
    @settings(max_examples=60, deadline=None)
    def test_partition_matches_flood_fill(self, img, connectivity):
        comps = connected_components(img, connectivity)
        expected = flood_components(img.mask, connectivity)
        assert len(comps) == len(expected)
        assert sum(c.pixel_count for c in comps) == int(img.mask.sum())
        for comp, pixels in zip(comps, expected):
            xs = [x for x, _ in pixels]
            ys = [y for _, y in pixels]
            assert comp.bbox == BBox(min(xs), min(ys), max(xs) + 1, max(ys) + 1)
            assert comp.pixel_count == len(pixels)

    @given(binary_images(max_side=12))
    @settings(max_examples=40, deadline=None)
    def test_8_connectivity_never_more_components(self, img):
        assert (len(connected_components(img, 8))
                <= len(connected_components(img, 4)))


class TestDistanceTransform:
    def test_full_foreground_all_zero(self):
        out = distance_transform(binary(np.ones((4, 4), bool)), "euclidean")
        assert (out.values == 0).all()

    def test_single_pixel_cityblock(self):
        m = np.zeros((4, 4), bool)
        m[0, 0] = True
        out = distance_transform(binary(m), "cityblock")
        for y in range(4):
            for x in range(4):
                assert out.values[y, x] == x + y

    def test_single_pixel_chessboard(self):
        m = np.zeros((4, 4), bool)
        m[0, 0] = True
        out = distance_transform(binary(m), "chessboard")
        for y in range(4):
            for x in range(4):
                assert out.values[y, x] == max(x, y)

    def test_empty_foreground_sentinel(self):
        out = distance_transform(binary(np.zeros((3, 5), bool)), "euclidean")
        assert (out.values == 8).all()

    @given(binary_images(max_side=16),
           st.sampled_from(["euclidean", "cityblock", "chessboard"]))
    @settings(max_examples=60, deadline=None)
    def test_matches_all_pairs_oracle(self, img, metric):
        out = distance_transform(img, metric)
        expected = distance_brute(img.mask, metric)
        if metric == "euclidean":
            assert np.abs(out.values - expected).max() <= 1e-6
        else:
            assert np.array_equal(out.values, expected)


class TestIoU:
    def test_identical(self):
        b = BBox(3, 4, 10, 12)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(BBox(0, 0, 5, 5), BBox(6, 6, 9, 9)) == 0.0

    def test_half_overlap_thirds(self):
        assert iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)) == pytest.approx(1 / 3)

    @given(bboxes(), bboxes())
    @settings(max_examples=120, deadline=None)
    def test_symmetric_bounded_and_pixel_exact(self, a, b):
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0
        assert (v == 1.0) == (a == b)
        assert v == pytest.approx(iou_pixel(a, b), abs=1e-12)


class TestTextRegions:
    def test_empty_page(self):
        assert text_regions(binary(np.zeros((10, 10), bool))) == []

    def test_blocks_merge_within_gap(self):
        m = np.zeros((10, 20), bool)
        m[2:7, 0:5] = True
        m[2:7, 8:13] = True
        out = text_regions(binary(m), min_area=4, merge_gap_x=5, merge_gap_y=2)
        assert out == [BBox(0, 2, 13, 7)]

    def test_blocks_stay_apart_beyond_gap(self):
        m = np.zeros((10, 20), bool)
        m[2:7, 0:5] = True
        m[2:7, 8:13] = True
        out = text_regions(binary(m), min_area=4, merge_gap_x=2, merge_gap_y=2)
        assert out == [BBox(0, 2, 5, 7), BBox(8, 2, 13, 7)]

    def test_min_area_filters_specks(self):
        m = np.zeros((10, 10), bool)
        m[0, 0] = True
        m[5:8, 5:8] = True
        out = text_regions(binary(m), min_area=4, merge_gap_x=1, merge_gap_y=1)
        assert out == [BBox(5, 5, 8, 8)]

    def test_reading_order(self):
        m = np.zeros((20, 20), bool)
        m[12:15, 1:4] = True
        m[2:5, 10:13] = True
        m[2:5, 1:4] = True
        out = text_regions(binary(m), min_area=4, merge_gap_x=2, merge_gap_y=2)
        assert [(b.y0, b.x0) for b in out] == [(2, 1), (2, 10), (12, 1)]


class TestTypes:
    def test_empty_bbox_rejected(self):
        with pytest.raises(ValueError):
            BBox(5, 5, 5, 9)

    def test_component_pixel_count_bounds(self):
        with pytest.raises(ValueError):
            Component(bbox=BBox(0, 0, 2, 2), pixel_count=5, label=1)

    def test_images_are_immutable(self):
        img = gray(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 7
