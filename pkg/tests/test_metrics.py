import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabrec.metrics import (EvalReport, ThresholdScores, harmonic_f1, icdar13_metrics,
                            icdar19_eval, match_boxes, region_area,
                            region_intersection_area, tablebank_metrics,
                            weighted_avg_f1)
from tabrec.raster import BBox, iou

from .conftest import bboxes
from .oracles import region_area_pixel, region_intersection_pixel

# F1 columns of the bundled reference table, IoU 0.6/0.7/0.8/0.9,
# with their weighted averages
BASELINE_F1_ROWS = [
    ((0.836, 0.816, 0.787, 0.634), 0.758),
    ((0.869, 0.855, 0.835, 0.705), 0.807),
    ((0.863, 0.853, 0.839, 0.684), 0.801),
    ((0.888, 0.884, 0.863, 0.736), 0.835),
]
THRESHOLDS = (0.6, 0.7, 0.8, 0.9)

# reference corpus-level (precision, recall) pairs and their harmonic F1s
SUMMED_AREA_ROWS = [
    ((92.99, 95.71), 94.33),
    ((95.92, 97.28), 96.60),
    ((94.35, 95.49), 94.92),
]


def boxes_grid(n, step=20, size=10):
    return [BBox(i * step, 0, i * step + size, size) for i in range(n)]


class TestMatchBoxes:
    def test_identical_sets_all_match(self):
        boxes = boxes_grid(4)
        for t in THRESHOLDS:
            matches, up, ug = match_boxes(boxes, list(boxes), t)
            assert len(matches) == 4 and up == [] and ug == []

    def test_disjoint_pair(self):
        matches, up, ug = match_boxes([BBox(0, 0, 5, 5)], [BBox(50, 50, 60, 60)], 0.6)
        assert matches == [] and up == [0] and ug == [0]

    def test_greedy_takes_best_overlap(self):
        gt = BBox(0, 0, 10, 10)
        p_high = BBox(0, 0, 10, 8)   # IoU 0.8
        p_low = BBox(0, 0, 10, 7)    # IoU 0.7
        assert iou(p_high, gt) == pytest.approx(0.8)
        assert iou(p_low, gt) == pytest.approx(0.7)
        matches, up, ug = match_boxes([p_low, p_high], [gt], 0.75)
        assert matches == [(1, 0, pytest.approx(0.8))]
        assert up == [0] and ug == []

    def test_counts_always_partition(self):
        preds = boxes_grid(3)
        gts = boxes_grid(5)
        for t in THRESHOLDS:
            matches, up, ug = match_boxes(preds, gts, t)
            assert len(matches) + len(up) == len(preds)
            assert len(matches) + len(ug) == len(gts)

    @given(st.lists(bboxes(bound=30), max_size=6), st.lists(bboxes(bound=30), max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_matching_injective_both_ways(self, preds, gts):
        matches, up, ug = match_boxes(preds, gts, 0.5)
        pis = [m[0] for m in matches]
        gis = [m[1] for m in matches]
        assert len(set(pis)) == len(pis)
        assert len(set(gis)) == len(gis)
        assert set(pis) | set(up) == set(range(len(preds)))
        assert set(gis) | set(ug) == set(range(len(gts)))


class TestWeightedAvgF1:
    @pytest.mark.parametrize("f1s,expected", BASELINE_F1_ROWS)
    def test_reproduces_reference_rows(self, f1s, expected):
        got = weighted_avg_f1(dict(zip(THRESHOLDS, f1s)))
        assert got == pytest.approx(expected, abs=1e-3)

    def test_all_ones(self):
        assert weighted_avg_f1(dict.fromkeys(THRESHOLDS, 1.0)) == pytest.approx(1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            weighted_avg_f1({})

    @given(st.lists(st.floats(0, 1), min_size=4, max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_convex_combination(self, f1s):
        got = weighted_avg_f1(dict(zip(THRESHOLDS, f1s)))
        assert min(f1s) - 1e-12 <= got <= max(f1s) + 1e-12


class TestRegionArithmetic:
    @given(st.lists(bboxes(bound=60), max_size=4))
    @settings(max_examples=60, deadline=None)
    def test_union_area_pixel_exact(self, boxes):
        assert region_area(boxes) == region_area_pixel(boxes)

    @given(st.lists(bboxes(bound=60), max_size=4), st.lists(bboxes(bound=60), max_size=4))
    @settings(max_examples=60, deadline=None)
    def test_intersection_area_pixel_exact(self, a, b):
        assert region_intersection_area(a, b) == region_intersection_pixel(a, b)


class TestTablebankMetrics:
    def test_perfect_predictions(self):
        pages = [(boxes_grid(3), boxes_grid(3)), (boxes_grid(1), boxes_grid(1))]
        assert tablebank_metrics(pages) == (1.0, 1.0, 1.0)

    @pytest.mark.parametrize("pr,expected", SUMMED_AREA_ROWS)
    def test_reproduces_reference_f1(self, pr, expected):
        p, r = pr
        assert harmonic_f1(p, r) == pytest.approx(expected, abs=0.02)

    def test_both_empty_is_vacuous_perfection(self):
        assert tablebank_metrics([([], [])]) == (1.0, 1.0, 1.0)

    def test_one_side_empty_scores_zero(self):
        assert tablebank_metrics([(boxes_grid(1), [])]) == (0.0, 0.0, 0.0)
        assert tablebank_metrics([([], boxes_grid(1))]) == (0.0, 0.0, 0.0)

    def test_half_overlap(self):
        pages = [([BBox(0, 0, 10, 10)], [BBox(0, 5, 10, 15)])]
        p, r, f1 = tablebank_metrics(pages)
        assert p == pytest.approx(0.5)
        assert r == pytest.approx(0.5)
        assert f1 == pytest.approx(0.5)

    @given(st.lists(st.tuples(st.lists(bboxes(bound=60), max_size=4),
                              st.lists(bboxes(bound=60), max_size=4)),
                    min_size=1, max_size=3))
    @settings(max_examples=40, deadline=None)
    def test_agrees_with_pixel_counter(self, pages):
        o = sum(region_intersection_pixel(p, g) for p, g in pages)
        pa = sum(region_area_pixel(p) for p, _ in pages)
        ga = sum(region_area_pixel(g) for _, g in pages)
        got = tablebank_metrics(pages)
        if pa == 0 and ga == 0:
            assert got == (1.0, 1.0, 1.0)
        elif pa == 0 or ga == 0:
            assert got == (0.0, 0.0, 0.0)
        else:
            assert got[0] == pytest.approx(o / pa)
            assert got[1] == pytest.approx(o / ga)


class TestIcdar13Metrics:
    def test_exact_predictions(self):
        pages = [(boxes_grid(2), boxes_grid(2))]
        assert icdar13_metrics(pages) == (1.0, 1.0, pytest.approx(1.0))

    def test_half_covered_gt(self):
        gt = BBox(0, 0, 10, 10)
        pred = BBox(0, 0, 10, 5)
        p, r, f1 = icdar13_metrics([([pred], [gt])])
        assert r == pytest.approx(0.5)
        assert p == pytest.approx(1.0)

    def test_one_missed_table_halves_recall(self):
        gts = [BBox(0, 0, 10, 10), BBox(20, 20, 30, 30)]
        preds = [BBox(0, 0, 10, 10)]
        p, r, f1 = icdar13_metrics([(preds, gts)])
        assert r == pytest.approx(0.5)
        assert p == pytest.approx(1.0)
        assert f1 == pytest.approx(harmonic_f1(1.0, 0.5))

    def test_no_ground_truth_is_an_error(self):
        with pytest.raises(ValueError):
            icdar13_metrics([(boxes_grid(1), [])])


class TestProtocolProperties:
    def random_pages(self, rng, n_pages=4):
        pages = []
        for _ in range(n_pages):
            def boxes():
                out = []
                for _ in range(rng.integers(0, 4)):
                    x0, y0 = rng.integers(0, 50, 2)
                    w, h = rng.integers(5, 30, 2)
                    out.append(BBox(int(x0), int(y0), int(x0 + w), int(y0 + h)))
                return out
            pages.append((boxes(), boxes()))
        return pages

    def test_self_evaluation_is_perfect_everywhere(self, rng):
        for _ in range(20):
            pages = [(g, list(g)) for _, g in self.random_pages(rng)]
            report = icdar19_eval(pages)
            assert all(s.f1 == 1.0 for s in report.thresholds if s.tp + s.fn > 0)
            assert tablebank_metrics(pages)[2] in (1.0,)
            if any(g for _, g in pages):
                assert icdar13_metrics(pages) == (1.0, 1.0, pytest.approx(1.0))

    def test_f1_non_increasing_in_threshold(self, rng):
        for _ in range(30):
            pages = self.random_pages(rng)
            report = icdar19_eval(pages)
            f1s = [s.f1 for s in report.thresholds]
            assert all(a >= b - 1e-12 for a, b in zip(f1s, f1s[1:]))

    def test_wavg_within_threshold_f1_range(self, rng):
        for _ in range(10):
            report = icdar19_eval(self.random_pages(rng))
            f1s = [s.f1 for s in report.thresholds]
            assert min(f1s) - 1e-12 <= report.weighted_avg_f1 <= max(f1s) + 1e-12

    def test_threshold_scores_definitions(self):
        s = ThresholdScores.from_counts(0.6, tp=3, fp=1, fn=2)
        assert s.precision == pytest.approx(0.75)
        assert s.recall == pytest.approx(0.6)
        assert s.f1 == pytest.approx(2 * 0.75 * 0.6 / 1.35)
        zero = ThresholdScores.from_counts(0.6, 0, 0, 0)
        assert (zero.precision, zero.recall, zero.f1) == (0.0, 0.0, 0.0)
