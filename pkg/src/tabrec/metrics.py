"""Detection evaluation protocols: IoU-thresholded matching with weighted
average F1, corpus-level summed-area metrics, and per-table averaged
completeness/purity metrics.

All region areas use exact rectangle arithmetic (coordinate compression),
never sampling.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .raster import BBox, iou

DEFAULT_IOU_THRESHOLDS = (0.6, 0.7, 0.8, 0.9)


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def harmonic_f1(precision: float, recall: float) -> float:
    return _safe_div(2.0 * precision * recall, precision + recall)


@dataclass(frozen=True)
class ThresholdScores:
    iou_threshold: float
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @staticmethod
    def from_counts(iou_threshold: float, tp: int, fp: int, fn: int) -> "ThresholdScores":
        p = _safe_div(tp, tp + fp)
        r = _safe_div(tp, tp + fn)
        return ThresholdScores(iou_threshold, tp, fp, fn, p, r, harmonic_f1(p, r))


@dataclass(frozen=True)
class PageMatches:
    """Per-page diagnostics of one matching pass."""

    image_id: str
    iou_threshold: float
    matches: tuple[tuple[int, int, float], ...]  # (pred index, gt index, IoU)
    unmatched_preds: tuple[int, ...]
    unmatched_gts: tuple[int, ...]


@dataclass(frozen=True)
class EvalReport:
    thresholds: tuple[ThresholdScores, ...]
    weighted_avg_f1: float
    pages: tuple[PageMatches, ...]


def match_boxes(preds: Sequence[BBox], gts: Sequence[BBox],
                t: float) -> tuple[list[tuple[int, int, float]], list[int], list[int]]:
    """Greedy one-to-one matching over all pairs in descending IoU order.

    A pair matches when its IoU >= t and neither side is taken yet; IoU ties
    break on (pred index, gt index). Returns (matches, unmatched pred
    indices, unmatched gt indices).
    """
    if not (0.0 < t <= 1.0):
        raise ValueError("IoU threshold must be in (0, 1]")
    pairs = []
    for pi, p in enumerate(preds):
        for gi, g in enumerate(gts):
            v = iou(p, g)
            if v >= t:
                pairs.append((-v, pi, gi))
    pairs.sort()
    used_p: set[int] = set()
    used_g: set[int] = set()
    matches = []
    for neg_v, pi, gi in pairs:
        if pi in used_p or gi in used_g:
            continue
        used_p.add(pi)
        used_g.add(gi)
        matches.append((pi, gi, -neg_v))
    return (matches,
            [i for i in range(len(preds)) if i not in used_p],
            [i for i in range(len(gts)) if i not in used_g])


def weighted_avg_f1(f1s: Mapping[float, float]) -> float:
    """Threshold-weighted mean of F1 scores: sum(t * F1_t) / sum(t)."""
    if not f1s:
        raise ValueError("weighted_avg_f1 needs at least one threshold")
    num = sum(t * f for t, f in f1s.items())
    den = sum(f1s.keys())
    return num / den


def icdar19_eval(pages: Sequence[tuple[Sequence[BBox], Sequence[BBox]]],
                 thresholds: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
                 image_ids: Sequence[str] | None = None) -> EvalReport:
    """IoU-thresholded detection scoring aggregated over pages."""
    ids = list(image_ids) if image_ids is not None else [str(i) for i in range(len(pages))]
    per_threshold = []
    diagnostics = []
    for t in thresholds:
        tp = fp = fn = 0
        for page_id, (preds, gts) in zip(ids, pages):
            matches, up, ug = match_boxes(preds, gts, t)
            tp += len(matches)
            fp += len(up)
            fn += len(ug)
            diagnostics.append(PageMatches(page_id, t, tuple(matches), tuple(up), tuple(ug)))
        per_threshold.append(ThresholdScores.from_counts(t, tp, fp, fn))
    wavg = weighted_avg_f1({s.iou_threshold: s.f1 for s in per_threshold})
    return EvalReport(tuple(per_threshold), wavg, tuple(diagnostics))


def _cover_grid(boxes: Sequence[BBox], xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    cover = np.zeros((len(ys) - 1, len(xs) - 1), dtype=bool)
    for b in boxes:
        ix0 = np.searchsorted(xs, b.x0)
        ix1 = np.searchsorted(xs, b.x1)
        iy0 = np.searchsorted(ys, b.y0)
        iy1 = np.searchsorted(ys, b.y1)
        cover[iy0:iy1, ix0:ix1] = True
    return cover


def _compressed_axes(boxes: Sequence[BBox]) -> tuple[np.ndarray, np.ndarray]:
    xs = sorted({b.x0 for b in boxes} | {b.x1 for b in boxes})
    ys = sorted({b.y0 for b in boxes} | {b.y1 for b in boxes})
    return np.array(xs), np.array(ys)


def region_area(boxes: Sequence[BBox]) -> int:
    """Exact area of the union of rectangles."""
    if not boxes:
        return 0
    xs, ys = _compressed_axes(boxes)
    cover = _cover_grid(boxes, xs, ys)
    cell = np.outer(np.diff(ys), np.diff(xs))
    return int(cell[cover].sum())


def region_intersection_area(a: Sequence[BBox], b: Sequence[BBox]) -> int:
    """Exact area of union(a) intersected with union(b)."""
    if not a or not b:
        return 0
    xs, ys = _compressed_axes(list(a) + list(b))
    cover = _cover_grid(a, xs, ys) & _cover_grid(b, xs, ys)
    cell = np.outer(np.diff(ys), np.diff(xs))
    return int(cell[cover].sum())


def tablebank_metrics(pages: Sequence[tuple[Sequence[BBox], Sequence[BBox]]]
                      ) -> tuple[float, float, float]:
    """Corpus-level scores from summed overlap, prediction, and ground-truth
    region areas. Empty-vs-empty counts as vacuous perfection (all 1);
    exactly one empty side scores 0.
    """
    overlap = sum(region_intersection_area(p, g) for p, g in pages)
    pred_area = sum(region_area(p) for p, _ in pages)
    gt_area = sum(region_area(g) for _, g in pages)
    if pred_area == 0 and gt_area == 0:
        return (1.0, 1.0, 1.0)
    if pred_area == 0 or gt_area == 0:
        return (0.0, 0.0, 0.0)
    precision = overlap / pred_area
    recall = overlap / gt_area
    return (precision, recall, harmonic_f1(precision, recall))


def icdar13_metrics(pages: Sequence[tuple[Sequence[BBox], Sequence[BBox]]]
                    ) -> tuple[float, float, float]:
    """Per-table completeness/purity at region-area granularity.

    Each ground-truth table scores recall against the union of that page's
    predictions; each predicted table scores precision against the union of
    the page's ground truth; the corpus reports the two means and their
    harmonic-mean F1. Raises when the corpus has no ground-truth tables.
    """
    gt_recalls: list[float] = []
    pred_precisions: list[float] = []
    for preds, gts in pages:
        for g in gts:
            gt_recalls.append(region_intersection_area([g], preds) / g.area)
        for p in preds:
            pred_precisions.append(region_intersection_area([p], gts) / p.area)
    if not gt_recalls:
        raise ValueError("icdar13 metrics are undefined without ground-truth tables")
    recall = float(np.mean(gt_recalls))
    precision = float(np.mean(pred_precisions)) if pred_precisions else 0.0
    return (precision, recall, harmonic_f1(precision, recall))
