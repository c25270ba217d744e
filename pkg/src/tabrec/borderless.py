"""Borderless branch: cluster model cells into row/column bands, estimate the
missing separators at band-gap midpoints, recover undetected cells from page
ink, and assign row/column spans.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .raster import BBox, BinaryImage, text_regions
from .structure import SOURCE_MODEL, SOURCE_RECOVERED, StructureCell, TableStructure

ROW = "row"
COLUMN = "column"


@dataclass(frozen=True)
class Band:
    """Pixel interval occupied by one row or column of cells."""

    axis: str                # row | column
    start: float
    end: float
    index: int

    def __post_init__(self):
        if self.axis not in (ROW, COLUMN):
            raise ValueError(f"bad axis {self.axis!r}")
        if self.end <= self.start:
            raise ValueError("band must have positive extent")


def _interval(box: BBox, axis: str) -> tuple[int, int]:
    return (box.y0, box.y1) if axis == ROW else (box.x0, box.x1)


def cluster_bands(cells: list[BBox], axis: str, overlap_frac: float = 0.5,
                  span_extent_factor: float = 1.8) -> list[Band]:
    """Group cell intervals along an axis into disjoint, ordered bands.

    Cells whose extent exceeds span_extent_factor x the median extent look
    like multi-band spans and are left out of band seeding. The remaining
    cells are swept by interval center; one joins the open band when its
    overlap with the band's running interval reaches overlap_frac of the
    shorter of the two, and the band extent grows to the union. Bands that
    end up overlapping (detection jitter) are trimmed at the overlap
    midpoint, or merged if one swallows the other.
    """
    if not (0.0 < overlap_frac <= 1.0):
        raise ValueError("overlap_frac must be in (0, 1]")
    if not cells:
        return []
    intervals = [_interval(b, axis) for b in cells]
    extents = np.array([e - s for s, e in intervals], dtype=float)
    cutoff = span_extent_factor * float(np.median(extents))
    seeds = [iv for iv, ext in zip(intervals, extents) if ext <= cutoff]
    if not seeds:
        seeds = intervals
    seeds.sort(key=lambda iv: ((iv[0] + iv[1]) / 2.0, iv[0], iv[1]))
    bands: list[list[float]] = [[*seeds[0]]]
    for s, e in seeds[1:]:
        bs, be = bands[-1]
        overlap = min(e, be) - max(s, bs)
        if overlap >= overlap_frac * min(e - s, be - bs):
            bands[-1] = [min(bs, s), max(be, e)]
        else:
            bands.append([s, e])
    bands.sort(key=lambda b: b[0])
    # enforce disjointness against jitter-induced overlaps
    cleaned: list[list[float]] = []
    for b in bands:
        if cleaned and b[0] < cleaned[-1][1]:
            mid = (b[0] + cleaned[-1][1]) / 2.0
            if mid <= cleaned[-1][0] or mid >= b[1]:
                cleaned[-1][1] = max(cleaned[-1][1], b[1])
                continue
            cleaned[-1][1] = mid
            b = [mid, b[1]]
        cleaned.append(b)
    return [Band(axis=axis, start=s, end=e, index=i)
            for i, (s, e) in enumerate(cleaned)]


def estimate_separators(bands: list[Band], table: BBox) -> list[float]:
    """One separator per inter-band gap midpoint, bracketed by the table
    edges; always returns band_count + 1 strictly increasing positions."""
    axis = bands[0].axis if bands else ROW
    lo, hi = (table.y0, table.y1) if axis == ROW else (table.x0, table.x1)
    seps = [float(lo)]
    for a, b in zip(bands, bands[1:]):
        seps.append((a.end + b.start) / 2.0)
    seps.append(float(hi))
    if any(b <= a for a, b in zip(seps, seps[1:])):
        raise ValueError("bands produce non-increasing separators")
    return seps


def _span_of(lo: float, hi: float, seps: list[float], margin: int) -> tuple[int, int, bool]:
    """Half-open slot span of interval [lo, hi) given separator positions.

    Start index = last separator <= lo + margin; end index = first separator
    >= hi - margin. Returns (start, end, clamped) where clamped reports a
    degenerate interval that had to be forced onto its nearest slot.
    """
    n_slots = len(seps) - 1
    i0 = 0
    for i, s in enumerate(seps):
        if s <= lo + margin:
            i0 = i
    i1 = len(seps) - 1
    for i in range(len(seps) - 1, -1, -1):
        if seps[i] >= hi - margin:
            i1 = i
    clamped = False
    if i0 >= n_slots:
        i0, clamped = n_slots - 1, True
    if i1 <= i0:
        i1, clamped = i0 + 1, True
    return i0, i1, clamped


def _slot_rect(row_seps: list[float], col_seps: list[float],
               r0: int, r1: int, c0: int, c1: int) -> BBox:
    return BBox(int(round(col_seps[c0])), int(round(row_seps[r0])),
                int(round(col_seps[c1])), int(round(row_seps[r1])))


def recover_missing_cells(page: BinaryImage, table: BBox,
                          row_seps: list[float], col_seps: list[float],
                          model_cells: list[BBox],
                          config: PipelineConfig = PipelineConfig()) -> list[BBox]:
    """Search every grid slot not covered by a model cell's span rectangle
    for ink; a slot with text yields one recovered cell box (the union of the
    text boxes found). Slots without ink stay empty.
    """
    n_rows, n_cols = len(row_seps) - 1, len(col_seps) - 1
    covered = np.zeros((n_rows, n_cols), dtype=bool)
    for box in model_cells:
        r0, r1, _ = _span_of(box.y0, box.y1, row_seps, config.margin)
        c0, c1, _ = _span_of(box.x0, box.x1, col_seps, config.margin)
        covered[r0:r1, c0:c1] = True
    recovered: list[BBox] = []
    for r in range(n_rows):
        for c in range(n_cols):
            if covered[r, c]:
                continue
            slot = _slot_rect(row_seps, col_seps, r, r + 1, c, c + 1)
            search = slot.inset(config.recover_inset)
            if search is None:
                continue
            sub = page.mask[search.y0:search.y1, search.x0:search.x1]
            if not sub.any():
                continue
            boxes = text_regions(BinaryImage(sub), config.text_min_area,
                                 config.text_merge_gap_x, config.text_merge_gap_y)
            if not boxes:
                continue
            union = boxes[0]
            for b in boxes[1:]:
                union = union.union_box(b)
            recovered.append(union.translate(search.x0, search.y0))
    return recovered


def assign_spans(cells: list[tuple[BBox, str]],
                 row_seps: list[float], col_seps: list[float],
                 margin: int = 2) -> tuple[list[StructureCell], list[str]]:
    """Turn cell boxes into span-indexed structure cells.

    A box crossing a separator by more than margin on both sides spans it.
    Claimed index rectangles never overlap: model cells outrank recovered
    ones, then larger areas win; a losing cell is shrunk to the slot under
    its center, or dropped (with a diagnostic) when that slot is taken too.
    """
    n_rows, n_cols = len(row_seps) - 1, len(col_seps) - 1
    diagnostics: list[str] = []
    entries = []
    for box, source in cells:
        r0, r1, rcl = _span_of(box.y0, box.y1, row_seps, margin)
        c0, c1, ccl = _span_of(box.x0, box.x1, col_seps, margin)
        if rcl or ccl:
            diagnostics.append(f"cell {box.as_list()} clamped to nearest slot")
        entries.append((box, source, r0, r1, c0, c1))
    priority = sorted(
        range(len(entries)),
        key=lambda i: (0 if entries[i][1] == SOURCE_MODEL else 1,
                       -entries[i][0].area,
                       entries[i][0].y0, entries[i][0].x0))
    claimed = np.zeros((n_rows, n_cols), dtype=bool)
    placed: list[StructureCell | None] = [None] * len(entries)
    for i in priority:
        box, source, r0, r1, c0, c1 = entries[i]
        if claimed[r0:r1, c0:c1].any():
            cx, cy = box.center
            r0 = min(max(_slot_index(cy, row_seps), 0), n_rows - 1)
            c0 = min(max(_slot_index(cx, col_seps), 0), n_cols - 1)
            r1, c1 = r0 + 1, c0 + 1
            if claimed[r0, c0]:
                diagnostics.append(f"cell {box.as_list()} dropped: center slot already claimed")
                continue
            diagnostics.append(f"cell {box.as_list()} shrunk to center slot ({r0},{c0})")
        claimed[r0:r1, c0:c1] = True
        placed[i] = StructureCell(r0, r1, c0, c1, bbox=box, source=source)
    return [c for c in placed if c is not None], diagnostics


def _slot_index(pos: float, seps: list[float]) -> int:
    idx = 0
    for i, s in enumerate(seps[:-1]):
        if pos >= s:
            idx = i
    return idx


def borderless_structure(page: BinaryImage, table: BBox, model_cells: list[BBox],
                         config: PipelineConfig = PipelineConfig()) -> TableStructure:
    """Full borderless branch: bands -> separators -> ink recovery -> spans."""
    diagnostics: list[str] = []
    row_bands = cluster_bands(model_cells, ROW, config.overlap_frac, config.span_extent_factor)
    col_bands = cluster_bands(model_cells, COLUMN, config.overlap_frac, config.span_extent_factor)
    row_seps = estimate_separators(row_bands, table) if row_bands else [float(table.y0), float(table.y1)]
    col_seps = estimate_separators(col_bands, table) if col_bands else [float(table.x0), float(table.x1)]

    recovered = recover_missing_cells(page, table, row_seps, col_seps, model_cells, config)
    entries = [(b, SOURCE_MODEL) for b in model_cells]
    entries += [(b, SOURCE_RECOVERED) for b in recovered]
    if not entries:
        diagnostics.append("no model cells and no detectable text; degenerate 1x1 structure")
        return TableStructure(table_bbox=table, table_type="borderless",
                              n_rows=1, n_cols=1, cells=(),
                              diagnostics=tuple(diagnostics))
    cells, span_diags = assign_spans(entries, row_seps, col_seps, config.margin)
    diagnostics.extend(span_diags)

    with_content = []
    for cell in cells:
        content = cell.content
        if cell.source == SOURCE_MODEL:
            sub_box = cell.bbox.intersect(table) or cell.bbox
            sub = page.mask[sub_box.y0:sub_box.y1, sub_box.x0:sub_box.x1]
            if sub.size and sub.any():
                boxes = text_regions(BinaryImage(sub), config.text_min_area,
                                     config.text_merge_gap_x, config.text_merge_gap_y)
                content = tuple(b.translate(sub_box.x0, sub_box.y0) for b in boxes)
        else:
            content = (cell.bbox,)
        with_content.append(StructureCell(cell.r0, cell.r1, cell.c0, cell.c1,
                                          bbox=cell.bbox, content=content,
                                          source=cell.source))
    return TableStructure(table_bbox=table, table_type="borderless",
                          n_rows=len(row_seps) - 1, n_cols=len(col_seps) - 1,
                          cells=tuple(with_content), diagnostics=tuple(diagnostics))
