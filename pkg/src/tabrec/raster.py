"""Raster primitives: images, boxes, binarization, morphology, components,
distance fields, and the contour-style text detector everything else builds on.

Conventions fixed here and relied on everywhere downstream:
  * grayscale intensity 0 = black ink, 255 = white paper
  * binary foreground = ink (dark pixels)
  * boxes are half-open pixel rectangles [x0, x1) x [y0, y1)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np
import scipy.ndimage as ndi

Connectivity = Literal[4, 8]
DistanceMetric = Literal["euclidean", "cityblock", "chessboard"]

_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale page raster, shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"GrayImage needs a 2-D non-empty array, got shape {px.shape}")
        object.__setattr__(self, "pixels", _freeze(px.copy()))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @staticmethod
    def blank(width: int, height: int, value: int = 255) -> "GrayImage":
        return GrayImage(np.full((height, width), value, dtype=np.uint8))


@dataclass(frozen=True)
class BinaryImage:
    """Boolean ink mask, True = foreground/ink, shape (height, width)."""

    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise ValueError(f"BinaryImage needs a 2-D non-empty array, got shape {m.shape}")
        object.__setattr__(self, "mask", _freeze(m.copy()))

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    def ink_count(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True, order=True)
class BBox:
    """Half-open pixel rectangle [x0, x1) x [y0, y1). Empty boxes are rejected."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        for name in ("x0", "y0", "x1", "y1"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise TypeError(f"BBox.{name} must be an integer, got {type(v).__name__}")
            object.__setattr__(self, name, int(v))
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError(f"empty BBox ({self.x0},{self.y0},{self.x1},{self.y1})")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def contains_box(self, other: "BBox") -> bool:
        return (self.x0 <= other.x0 and self.y0 <= other.y0
                and self.x1 >= other.x1 and self.y1 >= other.y1)

    def intersect(self, other: "BBox") -> "BBox | None":
        x0 = max(self.x0, other.x0)
        y0 = max(self.y0, other.y0)
        x1 = min(self.x1, other.x1)
        y1 = min(self.y1, other.y1)
        if x1 <= x0 or y1 <= y0:
            return None
        return BBox(x0, y0, x1, y1)

    def union_box(self, other: "BBox") -> "BBox":
        return BBox(min(self.x0, other.x0), min(self.y0, other.y0),
                    max(self.x1, other.x1), max(self.y1, other.y1))

    def translate(self, dx: int, dy: int) -> "BBox":
        return BBox(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)

    def inset(self, amount: int) -> "BBox | None":
        """Shrink by `amount` on every side; None when nothing remains."""
        x0, y0 = self.x0 + amount, self.y0 + amount
        x1, y1 = self.x1 - amount, self.y1 - amount
        if x1 <= x0 or y1 <= y0:
            return None
        return BBox(x0, y0, x1, y1)

    def as_list(self) -> list[int]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class Component:
    """One connected foreground component."""

    bbox: BBox
    pixel_count: int
    label: int

    def __post_init__(self):
        if not (1 <= self.pixel_count <= self.bbox.area):
            raise ValueError(
                f"pixel_count {self.pixel_count} outside [1, {self.bbox.area}]")


@dataclass(frozen=True)
class DistanceField:
    """Per-pixel distance to the nearest foreground pixel (0 on foreground)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("DistanceField needs a 2-D array")
        object.__setattr__(self, "values", _freeze(v.copy()))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def otsu_threshold(img: GrayImage) -> int:
    """Exclusive Otsu threshold T maximizing between-class variance of the
    partition {p < T} vs {p >= T}, scanned over T = 0..255.

    Ties take the smallest T; a uniform image (zero variance everywhere)
    yields T = 0, i.e. the page binarizes to all-background.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    cum_n = np.cumsum(hist)                  # pixels with value < T, at index T-1
    cum_sum = np.cumsum(hist * np.arange(256))
    best_t, best_var = 0, 0.0
    for t in range(1, 256):
        n0 = cum_n[t - 1]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = cum_sum[t - 1] / n0
        mu1 = (cum_sum[255] - cum_sum[t - 1]) / n1
        var = (n0 / total) * (n1 / total) * (mu0 - mu1) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return best_t


def binarize(img: GrayImage, method: str = "otsu", threshold: int | None = None) -> BinaryImage:
    """Foreground = pixels darker than the threshold (intensity < T).

    method "otsu" derives T from the histogram; method "fixed" uses the given
    0..255 threshold.
    """
    if method == "otsu":
        t = otsu_threshold(img)
    elif method == "fixed":
        if threshold is None or not (0 <= threshold <= 255):
            raise ValueError("fixed binarization needs a threshold in 0..255")
        t = int(threshold)
    else:
        raise ValueError(f"unknown binarization method {method!r}")
    return BinaryImage(img.pixels < t)


def render_binary(img: BinaryImage) -> GrayImage:
    """Foreground as 0 (ink), background as 255."""
    return GrayImage(np.where(img.mask, 0, 255).astype(np.uint8))


def dilate_binary(img: BinaryImage, kw: int, kh: int, iterations: int = 1) -> BinaryImage:
    """Minkowski dilation by the kw x kh rectangle anchored at its top-left
    cell: each foreground pixel also turns on the pixels up to kw-1 to the
    right and kh-1 below it, clipped at the image border.
    """
    if kw < 1 or kh < 1 or iterations < 0:
        raise ValueError("kernel dims must be >= 1 and iterations >= 0")
    mask = img.mask
    h, w = mask.shape
    for _ in range(iterations):
        out = np.zeros_like(mask)
        for dy in range(min(kh, h)):
            for dx in range(min(kw, w)):
                out[dy:, dx:] |= mask[:h - dy, :w - dx]
        mask = out
    return BinaryImage(mask)


def connected_components(img: BinaryImage, connectivity: Connectivity = 8) -> list[Component]:
    """Partition the foreground into maximal connected sets.

    Labels are assigned 1..n in raster-scan order of each component's first
    (topmost, then leftmost) pixel.
    """
    if connectivity == 4:
        struct = _STRUCT_4
    elif connectivity == 8:
        struct = _STRUCT_8
    else:
        raise ValueError("connectivity must be 4 or 8")
    raw, n = ndi.label(img.mask, structure=struct)
    if n == 0:
        return []
    w = img.width
    counts = np.bincount(raw.ravel(), minlength=n + 1)
    slices = ndi.find_objects(raw)
    ys, xs = np.nonzero(img.mask)
    order_key = ys * w + xs
    first = np.full(n + 1, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(first, raw[ys, xs], order_key)
    raster_order = sorted(range(1, n + 1), key=lambda lbl: first[lbl])
    comps = []
    for new_label, lbl in enumerate(raster_order, start=1):
        sl = slices[lbl - 1]
        bbox = BBox(sl[1].start, sl[0].start, sl[1].stop, sl[0].stop)
        comps.append(Component(bbox=bbox, pixel_count=int(counts[lbl]), label=new_label))
    return comps


def distance_transform(img: BinaryImage, metric: DistanceMetric = "euclidean") -> DistanceField:
    """Distance from every pixel to the nearest foreground pixel.

    With no foreground at all, every value is the finite sentinel
    width + height (farther than any in-image distance).
    """
    if not img.mask.any():
        sentinel = float(img.width + img.height)
        return DistanceField(np.full(img.mask.shape, sentinel))
    background = ~img.mask
    if metric == "euclidean":
        values = ndi.distance_transform_edt(background)
    elif metric == "cityblock":
        values = ndi.distance_transform_cdt(background, metric="taxicab").astype(np.float64)
    elif metric == "chessboard":
        values = ndi.distance_transform_cdt(background, metric="chessboard").astype(np.float64)
    else:
        raise ValueError(f"unknown distance metric {metric!r}")
    return DistanceField(values)


def iou(a: BBox, b: BBox) -> float:
    """Intersection area over union area; 0.0 for disjoint boxes."""
    inter = a.intersect(b)
    if inter is None:
        return 0.0
    ia = inter.area
    return ia / float(a.area + b.area - ia)


def _hgap(a: BBox, b: BBox) -> int:
    return max(a.x0 - b.x1, b.x0 - a.x1)


def _voverlap(a: BBox, b: BBox) -> int:
    # positive = overlap length, negative = gap
    return min(a.y1, b.y1) - max(a.y0, b.y0)


def _should_merge(a: BBox, b: BBox, merge_gap_x: int, merge_gap_y: int) -> bool:
    if _hgap(a, b) > merge_gap_x:
        return False
    ov = _voverlap(a, b)
    if ov > 0:
        return ov >= 0.5 * min(a.height, b.height)
    return -ov <= merge_gap_y


def text_regions(img: BinaryImage, min_area: int = 4,
                 merge_gap_x: int = 8, merge_gap_y: int = 2) -> list[BBox]:
    """Connected-component text detector: keep components with at least
    min_area pixels, then merge boxes into word/line boxes to a fixed point.

    Two boxes merge when their horizontal gap is <= merge_gap_x and they are
    vertically compatible: interval overlap >= 50% of the shorter height, or
    (when vertically disjoint) a gap <= merge_gap_y. Output is sorted in
    reading order (top-to-bottom, then left-to-right).
    """
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    boxes = [c.bbox for c in connected_components(img, connectivity=8)
             if c.pixel_count >= min_area]
    merged = True
    while merged:
        merged = False
        out: list[BBox] = []
        for box in boxes:
            for i, existing in enumerate(out):
                if _should_merge(existing, box, merge_gap_x, merge_gap_y):
                    out[i] = existing.union_box(box)
                    merged = True
                    break
            else:
                out.append(box)
        boxes = out
    return sorted(boxes, key=lambda b: (b.y0, b.x0))
