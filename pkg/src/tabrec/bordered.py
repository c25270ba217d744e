"""Bordered branch: morphological run extraction finds the ruling lines, their
intersections define the grid, and per-cell text detection fills the content.

Merged cells are never inferred here; a table whose interior rules are partly
missing belongs to the borderless branch by classification.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .raster import BBox, BinaryImage, text_regions
from .structure import SOURCE_MODEL, StructureCell, TableStructure

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

RUN_BRIDGE_GAP = 3   # px; broken-rule gaps up to this are bridged
MERGE_DIST = 3       # px; collinear segments this close collapse into one line
MIN_RUN_LEN = 15     # px; absolute floor of the run kernel length


@dataclass(frozen=True)
class RulingLine:
    orientation: str              # horizontal | vertical
    position: float               # y for horizontal, x for vertical (page coords)
    span: tuple[int, int]         # extent along the line (page coords)

    def __post_init__(self):
        if self.orientation not in (HORIZONTAL, VERTICAL):
            raise ValueError(f"bad orientation {self.orientation!r}")
        if self.span[1] <= self.span[0]:
            raise ValueError("line span must be non-empty")

    @property
    def length(self) -> int:
        return self.span[1] - self.span[0]


@dataclass(frozen=True)
class Grid:
    """Separator positions, both including the table's own edges."""

    row_separators: tuple[int, ...]
    col_separators: tuple[int, ...]

    def __post_init__(self):
        for seps in (self.row_separators, self.col_separators):
            if len(seps) < 2 or any(b <= a for a, b in zip(seps, seps[1:])):
                raise ValueError("separators must be >= 2 strictly increasing positions")

    @property
    def n_rows(self) -> int:
        return len(self.row_separators) - 1

    @property
    def n_cols(self) -> int:
        return len(self.col_separators) - 1


def _bridged_runs(row: np.ndarray, bridge: int) -> list[tuple[int, int]]:
    """Maximal True runs of a 1-D mask, with gaps <= bridge fused."""
    padded = np.concatenate(([False], row, [False]))
    diff = np.diff(padded.astype(np.int8))
    starts = np.nonzero(diff == 1)[0]
    ends = np.nonzero(diff == -1)[0]
    runs: list[tuple[int, int]] = []
    for s, e in zip(starts, ends):
        if runs and s - runs[-1][1] <= bridge:
            runs[-1] = (runs[-1][0], int(e))
        else:
            runs.append((int(s), int(e)))
    return runs


def _scan_lines(crop: np.ndarray, run_len: int) -> list[tuple[int, int, int]]:
    """(row, start, end) segments whose bridged run length >= run_len."""
    segments = []
    counts = crop.sum(axis=1)
    # worst bridged run alternates 1-px dashes with 3-px gaps: >= 1/4 ink density
    candidates = np.nonzero(counts >= max(1, run_len // (RUN_BRIDGE_GAP + 1)))[0]
    for y in candidates:
        for s, e in _bridged_runs(crop[y], RUN_BRIDGE_GAP):
            if e - s >= run_len:
                segments.append((int(y), s, e))
    return segments


def _merge_segments(segments: list[tuple[int, int, int]]) -> list[tuple[float, int, int]]:
    """Fuse segments at nearby positions (thick or jittered rules) into
    (mean position, span start, span end) lines."""
    if not segments:
        return []
    segments = sorted(segments)
    lines = []
    group = [segments[0]]
    for seg in segments[1:]:
        if seg[0] - group[-1][0] <= MERGE_DIST:
            group.append(seg)
        else:
            lines.append(group)
            group = [seg]
    lines.append(group)
    out = []
    for group in lines:
        pos = float(np.mean([g[0] for g in group]))
        out.append((pos, min(g[1] for g in group), max(g[2] for g in group)))
    return out


def detect_ruling_lines(page: BinaryImage, table: BBox,
                        min_len_frac: float = 0.5) -> list[RulingLine]:
    """Find horizontal and vertical rules inside the table region.

    A rule survives when its bridged run reaches max(15, min_len_frac x the
    table dimension along the run). Positions are reported in page
    coordinates; a blank region yields an empty list.
    """
    if not (0.0 < min_len_frac <= 1.0):
        raise ValueError("min_len_frac must be in (0, 1]")
    crop = page.mask[table.y0:table.y1, table.x0:table.x1]
    lines: list[RulingLine] = []
    h_len = max(MIN_RUN_LEN, int(round(min_len_frac * table.width)))
    for pos, s, e in _merge_segments(_scan_lines(crop, h_len)):
        if e - s >= min_len_frac * table.width:
            lines.append(RulingLine(HORIZONTAL, pos + table.y0,
                                    (s + table.x0, e + table.x0)))
    v_len = max(MIN_RUN_LEN, int(round(min_len_frac * table.height)))
    for pos, s, e in _merge_segments(_scan_lines(crop.T, v_len)):
        if e - s >= min_len_frac * table.height:
            lines.append(RulingLine(VERTICAL, pos + table.x0,
                                    (s + table.y0, e + table.y0)))
    return lines


def _collapse_positions(positions: list[float], snap_tol: int) -> list[float]:
    if not positions:
        return []
    positions = sorted(positions)
    clusters = [[positions[0]]]
    for p in positions[1:]:
        if p - clusters[-1][-1] <= snap_tol:
            clusters[-1].append(p)
        else:
            clusters.append([p])
    return [float(np.mean(c)) for c in clusters]


def _separators(positions: list[float], lo: int, hi: int, snap_tol: int) -> tuple[int, ...]:
    seps = list(positions)
    if not any(abs(p - lo) <= snap_tol for p in seps):
        seps.append(float(lo))
    if not any(abs(p - hi) <= snap_tol for p in seps):
        seps.append(float(hi))
    out = sorted(int(round(p)) for p in seps)
    if len(out) < 2:  # everything snapped onto a single position
        out = [lo, hi]
    return tuple(out)


def grid_from_lines(lines: list[RulingLine], table: BBox, snap_tol: int = 5) -> Grid:
    """Collapse near-coincident line positions (mean within snap_tol chains)
    and bracket with the table edges where no line already sits."""
    h = _collapse_positions([l.position for l in lines if l.orientation == HORIZONTAL], snap_tol)
    v = _collapse_positions([l.position for l in lines if l.orientation == VERTICAL], snap_tol)
    return Grid(row_separators=_separators(h, table.y0, table.y1, snap_tol),
                col_separators=_separators(v, table.x0, table.x1, snap_tol))


def bordered_structure(page: BinaryImage, table: BBox,
                       config: PipelineConfig = PipelineConfig()) -> TableStructure:
    """Full bordered branch: lines -> grid -> per-cell text content.

    Every grid slot becomes its own 1x1 cell; text is searched in the slot
    interior inset by line thickness + 1 px.
    """
    lines = detect_ruling_lines(page, table, config.min_len_frac)
    grid = grid_from_lines(lines, table, config.snap_tol)
    inset = config.line_thickness + 1
    cells = []
    for r in range(grid.n_rows):
        for c in range(grid.n_cols):
            rect = BBox(grid.col_separators[c], grid.row_separators[r],
                        grid.col_separators[c + 1], grid.row_separators[r + 1])
            interior = rect.inset(inset)
            content: tuple[BBox, ...] = ()
            if interior is not None:
                sub = page.mask[interior.y0:interior.y1, interior.x0:interior.x1]
                if sub.any():
                    boxes = text_regions(BinaryImage(sub), config.text_min_area,
                                         config.text_merge_gap_x, config.text_merge_gap_y)
                    content = tuple(b.translate(interior.x0, interior.y0) for b in boxes)
            cells.append(StructureCell(r, r + 1, c, c + 1, bbox=rect,
                                       content=content, source=SOURCE_MODEL))
    return TableStructure(table_bbox=table, table_type="bordered",
                          n_rows=grid.n_rows, n_cols=grid.n_cols, cells=tuple(cells))
