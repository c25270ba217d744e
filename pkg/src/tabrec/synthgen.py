"""Deterministic synthetic document generator: rendered pages with exact
structure ground truth and matching "perfect detection" JSON.

Pages are laid out as vertical strips, one table per strip. Each table picks
a type, grid, merged-cell spans (borderless-class tables only; a fully ruled
table with merged cells would no longer be recoverable from lines alone), and
solid word-blob content. Slot size is uniform within a table so that merged
cells always clear the span-candidate cutoff of the borderless branch.

All randomness flows from SynthSpec.seed through the xorshift64* generator in
tabrec.rng; page i uses its own stream seeded with seed + i, so pages can be
generated concurrently and still match serial output byte for byte.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import imgio
from .detections import (BORDERED_TABLE, BORDERLESS_TABLE, CELL, DetectionInstance,
                         GroundTruthCell, GroundTruthPage, GroundTruthTable,
                         PageDetections, serialize_detections, serialize_ground_truth)
from .raster import BBox, GrayImage
from .rng import Xorshift64Star

BORDERED = "bordered"
BORDERLESS = "borderless"
SEMI_BORDERED = "semi_bordered"
TABLE_TYPES = (BORDERED, BORDERLESS, SEMI_BORDERED)

PAGE_MARGIN = 20
STRIP_GAP = 30
MIN_SLOT_W = 57
MIN_SLOT_H = 57
SLOT_WIGGLE = 18      # extra slot size a table may add on top of the minimum
BLOB_PAD = 8          # blob distance from its slot edges
BLOB_W = (6, 10)
BLOB_H = (5, 10)
BLOB_GAP = (4, 6)
SEMI_REMOVE_FRAC = (0.2, 0.6)


class SynthSpecError(ValueError):
    """The spec cannot be rendered (page too small for the requested grids)."""


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    page_width: int = 1240
    page_height: int = 1754
    tables_per_page: tuple[int, int] = (1, 3)
    rows: tuple[int, int] = (2, 6)
    cols: tuple[int, int] = (2, 5)
    table_types: tuple[str, ...] = TABLE_TYPES
    span_prob: float = 0.15
    empty_cell_prob: float = 0.1
    line_thickness: int = 2
    jitter_px: int = 0
    blobs_per_cell: tuple[int, int] = (1, 3)

    def __post_init__(self):
        object.__setattr__(self, "tables_per_page", tuple(self.tables_per_page))
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        object.__setattr__(self, "table_types", tuple(self.table_types))
        object.__setattr__(self, "blobs_per_cell", tuple(self.blobs_per_cell))
        for name in ("tables_per_page", "rows", "cols", "blobs_per_cell"):
            lo, hi = getattr(self, name)
            if not (1 <= lo <= hi):
                raise SynthSpecError(f"{name} range ({lo}, {hi}) is invalid")
        if not self.table_types or any(t not in TABLE_TYPES for t in self.table_types):
            raise SynthSpecError(f"table_types must draw from {TABLE_TYPES}")
        if not (0.0 <= self.span_prob < 1.0) or not (0.0 <= self.empty_cell_prob < 1.0):
            raise SynthSpecError("span_prob and empty_cell_prob must be in [0, 1)")
        if not (1 <= self.line_thickness <= 3):
            raise SynthSpecError("line_thickness must be 1..3")
        if self.jitter_px < 0:
            raise SynthSpecError("jitter_px must be >= 0")
        self._check_feasible()

    def _check_feasible(self):
        n = self.tables_per_page[1]
        strip_h = (self.page_height - 2 * PAGE_MARGIN - (n - 1) * STRIP_GAP) // n
        need_h = self.rows[1] * MIN_SLOT_H + self.line_thickness
        need_w = self.cols[1] * MIN_SLOT_W + self.line_thickness
        avail_w = self.page_width - 2 * PAGE_MARGIN
        if strip_h < need_h:
            raise SynthSpecError(
                f"page height {self.page_height} cannot fit {n} tables of "
                f"{self.rows[1]} rows (needs strip height {need_h}, has {strip_h})")
        if avail_w < need_w:
            raise SynthSpecError(
                f"page width {self.page_width} cannot fit {self.cols[1]} columns "
                f"(needs {need_w}, has {avail_w})")

    @staticmethod
    def from_dict(raw: dict) -> "SynthSpec":
        known = {f.name for f in fields(SynthSpec)}
        unknown = set(raw) - known
        if unknown:
            raise SynthSpecError(f"unknown spec keys: {sorted(unknown)}")
        return SynthSpec(**raw)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed, "page_width": self.page_width,
            "page_height": self.page_height,
            "tables_per_page": list(self.tables_per_page),
            "rows": list(self.rows), "cols": list(self.cols),
            "table_types": list(self.table_types),
            "span_prob": self.span_prob, "empty_cell_prob": self.empty_cell_prob,
            "line_thickness": self.line_thickness, "jitter_px": self.jitter_px,
            "blobs_per_cell": list(self.blobs_per_cell),
        }


@dataclass(frozen=True)
class SynthCell:
    r0: int
    r1: int
    c0: int
    c1: int
    rect: BBox
    empty: bool
    blobs: tuple[BBox, ...]


@dataclass(frozen=True)
class SynthTable:
    gen_type: str
    bbox: BBox
    n_rows: int
    n_cols: int
    row_seps: tuple[int, ...]
    col_seps: tuple[int, ...]
    cells: tuple[SynthCell, ...]

    def span_map(self) -> set[tuple[int, int, int, int]]:
        return {(c.r0, c.r1, c.c0, c.c1) for c in self.cells if not c.empty}

    def occupied_slots(self) -> set[tuple[int, int]]:
        out = set()
        for c in self.cells:
            if not c.empty:
                out |= {(r, k) for r in range(c.r0, c.r1) for k in range(c.c0, c.c1)}
        return out


@dataclass(frozen=True)
class SynthDocument:
    image_id: str
    image: GrayImage
    gt: GroundTruthPage
    perfect_detections: PageDetections
    tables: tuple[SynthTable, ...]


def _layout_spans(rng: Xorshift64Star, rows: int, cols: int,
                  span_prob: float) -> list[tuple[int, int, int, int]]:
    """Raster-order claim of 1x2 / 2x1 merged cells; everything else 1x1."""
    claimed = np.zeros((rows, cols), dtype=bool)
    cells = []
    for r in range(rows):
        for c in range(cols):
            if claimed[r, c]:
                continue
            placed = False
            if span_prob > 0 and rng.chance(span_prob):
                go_right_first = rng.chance(0.5)
                for dr, dc in ([(0, 1), (1, 0)] if go_right_first else [(1, 0), (0, 1)]):
                    nr, nc = r + dr, c + dc
                    if nr < rows and nc < cols and not claimed[nr, nc]:
                        claimed[r:nr + 1, c:nc + 1] = True
                        cells.append((r, nr + 1, c, nc + 1))
                        placed = True
                        break
            if not placed:
                claimed[r, c] = True
                cells.append((r, r + 1, c, c + 1))
    return cells


def _demote_for_seeding(cells: list[tuple[int, int, int, int]],
                        rows: int, cols: int) -> list[tuple[int, int, int, int]]:
    """Every row needs a 1-tall cell and every column a 1-wide cell so the
    band clustering can see it; offending spans split back into slots."""
    changed = True
    while changed:
        changed = False
        for r in range(rows):
            if any(c[1] - c[0] == 1 and c[0] == r for c in cells):
                continue
            victim = next(c for c in cells if c[0] <= r < c[1])
            cells.remove(victim)
            cells.extend((rr, rr + 1, cc, cc + 1)
                         for rr in range(victim[0], victim[1])
                         for cc in range(victim[2], victim[3]))
            changed = True
        for k in range(cols):
            if any(c[3] - c[2] == 1 and c[2] == k for c in cells):
                continue
            victim = next(c for c in cells if c[2] <= k < c[3])
            cells.remove(victim)
            cells.extend((rr, rr + 1, cc, cc + 1)
                         for rr in range(victim[0], victim[1])
                         for cc in range(victim[2], victim[3]))
            changed = True
    return sorted(cells)


def _enforce_span_minority(cells: list[tuple[int, int, int, int]]
                           ) -> list[tuple[int, int, int, int]]:
    """Keep multi-slot cells a strict minority per axis; otherwise the median
    extent drifts and the borderless branch cannot tell spans from slots."""
    cells = sorted(cells)
    while True:
        n = len(cells)
        limit = (n - 1) // 2
        wide = [c for c in cells if c[3] - c[2] > 1]
        tall = [c for c in cells if c[1] - c[0] > 1]
        victim = None
        if len(wide) > limit:
            victim = wide[0]
        elif len(tall) > limit:
            victim = tall[0]
        if victim is None:
            return cells
        cells.remove(victim)
        cells.extend((r, r + 1, c, c + 1)
                     for r in range(victim[0], victim[1])
                     for c in range(victim[2], victim[3]))
        cells.sort()


def _assign_empties(rng: Xorshift64Star, cells: list[tuple[int, int, int, int]],
                    rows: int, cols: int, empty_prob: float,
                    fix_coverage: bool) -> list[bool]:
    empty = [rng.chance(empty_prob) for _ in cells]
    if not fix_coverage:
        return empty
    for r in range(rows):
        hits = [i for i, c in enumerate(cells) if c[1] - c[0] == 1 and c[0] == r]
        if hits and not any(not empty[i] for i in hits):
            empty[hits[0]] = False
    for k in range(cols):
        hits = [i for i, c in enumerate(cells) if c[3] - c[2] == 1 and c[2] == k]
        if hits and not any(not empty[i] for i in hits):
            empty[hits[0]] = False
    return empty


def _place_blobs(rng: Xorshift64Star, slot: BBox, n_min: int, n_max: int) -> list[BBox]:
    """Left-to-right solid blobs inside the slot, BLOB_PAD clear of its edges."""
    region = slot.inset(BLOB_PAD)
    if region is None:
        return []
    n = rng.randint(n_min, n_max)
    blobs = []
    x = region.x0
    for _ in range(n):
        bw = rng.randint(*BLOB_W)
        bh = rng.randint(*BLOB_H)
        if x + bw > region.x1 or bh > region.height:
            break
        y = region.y0 + rng.randint(0, region.height - bh)
        blobs.append(BBox(x, y, x + bw, y + bh))
        x += bw + rng.randint(*BLOB_GAP)
    return blobs


def _draw_rules(canvas: np.ndarray, table_type: str, bbox: BBox,
                row_seps: tuple[int, ...], col_seps: tuple[int, ...],
                cells: list[tuple[int, int, int, int]], t: int,
                rng: Xorshift64Star) -> None:
    rows, cols = len(row_seps) - 1, len(col_seps) - 1
    if table_type == BORDERLESS:
        return
    interior = ([("row", r) for r in range(1, rows)]
                + [("col", c) for c in range(1, cols)])
    removed: set[tuple[str, int]] = set()
    if table_type == SEMI_BORDERED and interior:
        frac = rng.uniform(*SEMI_REMOVE_FRAC)
        k = int(round(frac * len(interior)))
        order = rng.shuffle(list(interior))
        removed = set(order[:k])
    # outer border
    canvas[bbox.y0:bbox.y0 + t, bbox.x0:bbox.x1] = 0
    canvas[bbox.y1 - t:bbox.y1, bbox.x0:bbox.x1] = 0
    canvas[bbox.y0:bbox.y1, bbox.x0:bbox.x0 + t] = 0
    canvas[bbox.y0:bbox.y1, bbox.x1 - t:bbox.x1] = 0

    def crossing_span(axis: str, idx: int, slot: int) -> bool:
        for r0, r1, c0, c1 in cells:
            if axis == "row" and r0 < idx < r1 and c0 <= slot < c1:
                return True
            if axis == "col" and c0 < idx < c1 and r0 <= slot < r1:
                return True
        return False

    for r in range(1, rows):
        if ("row", r) in removed:
            continue
        y = row_seps[r]
        for c in range(cols):
            if crossing_span("row", r, c):
                continue
            canvas[y:y + t, col_seps[c]:col_seps[c + 1]] = 0
    for c in range(1, cols):
        if ("col", c) in removed:
            continue
        x = col_seps[c]
        for r in range(rows):
            if crossing_span("col", c, r):
                continue
            canvas[row_seps[r]:row_seps[r + 1], x:x + t] = 0


def _jitter_box(rng: Xorshift64Star, box: BBox, j: int, w: int, h: int) -> BBox:
    if j == 0:
        return box
    dx0, dy0 = rng.randint(-j, j), rng.randint(-j, j)
    dx1, dy1 = rng.randint(-j, j), rng.randint(-j, j)
    x0 = max(0, min(box.x0 + dx0, w - 1))
    y0 = max(0, min(box.y0 + dy0, h - 1))
    x1 = max(x0 + 1, min(box.x1 + dx1, w))
    y1 = max(y0 + 1, min(box.y1 + dy1, h))
    return BBox(x0, y0, x1, y1)


def _generate_page(spec: SynthSpec, index: int) -> SynthDocument:
    rng = Xorshift64Star(spec.seed + index)
    w, h, t = spec.page_width, spec.page_height, spec.line_thickness
    canvas = np.full((h, w), 255, dtype=np.uint8)
    n_tables = rng.randint(*spec.tables_per_page)
    strip_h = (h - 2 * PAGE_MARGIN - (n_tables - 1) * STRIP_GAP) // n_tables
    avail_w = w - 2 * PAGE_MARGIN
    tables: list[SynthTable] = []
    for ti in range(n_tables):
        strip_top = PAGE_MARGIN + ti * (strip_h + STRIP_GAP)
        table_type = rng.choice(spec.table_types)
        rows = rng.randint(*spec.rows)
        cols = rng.randint(*spec.cols)
        slot_h = rng.randint(MIN_SLOT_H, min(MIN_SLOT_H + SLOT_WIGGLE, (strip_h - t) // rows))
        slot_w = rng.randint(MIN_SLOT_W, min(MIN_SLOT_W + SLOT_WIGGLE, (avail_w - t) // cols))
        th = rows * slot_h + t
        tw = cols * slot_w + t
        top = strip_top + rng.randint(0, strip_h - th)
        left = PAGE_MARGIN + rng.randint(0, avail_w - tw)
        bbox = BBox(left, top, left + tw, top + th)
        row_seps = tuple(top + r * slot_h for r in range(rows + 1))
        col_seps = tuple(left + c * slot_w for c in range(cols + 1))

        borderless_class = table_type != BORDERED
        span_prob = spec.span_prob if borderless_class else 0.0
        layout = _layout_spans(rng, rows, cols, span_prob)
        if borderless_class:
            layout = _enforce_span_minority(_demote_for_seeding(layout, rows, cols))
        empties = _assign_empties(rng, layout, rows, cols, spec.empty_cell_prob,
                                  fix_coverage=borderless_class)

        cells = []
        for (r0, r1, c0, c1), is_empty in zip(layout, empties):
            rect = BBox(col_seps[c0], row_seps[r0], col_seps[c1], row_seps[r1])
            blobs: tuple[BBox, ...] = ()
            if not is_empty:
                top_left_slot = BBox(col_seps[c0], row_seps[r0],
                                     col_seps[c0 + 1], row_seps[r0 + 1])
                placed = _place_blobs(rng, top_left_slot, *spec.blobs_per_cell)
                # slot geometry (>= MIN_SLOT, pad 8, blob <= 10) always fits one
                assert placed, "non-empty cell rendered without ink"
                for blob in placed:
                    canvas[blob.y0:blob.y1, blob.x0:blob.x1] = 0
                blobs = tuple(placed)
            cells.append(SynthCell(r0, r1, c0, c1, rect, is_empty, blobs))

        _draw_rules(canvas, table_type, bbox, row_seps, col_seps, layout, t, rng)
        tables.append(SynthTable(table_type, bbox, rows, cols, row_seps, col_seps,
                                 tuple(cells)))

    image_id = f"page_{index:05d}"
    gt_tables = []
    instances: list[DetectionInstance] = []
    for table in tables:
        borderless_class = table.gen_type != BORDERED
        cls = BORDERLESS_TABLE if borderless_class else BORDERED_TABLE
        if borderless_class:
            gt_cells = tuple(GroundTruthCell(c.rect, (c.r0, c.r1), (c.c0, c.c1))
                             for c in table.cells if not c.empty)
        else:
            gt_cells = tuple(GroundTruthCell(c.rect, (c.r0, c.r1), (c.c0, c.c1))
                             for c in table.cells)
        gt_tables.append(GroundTruthTable(cls=cls, bbox=table.bbox, cells=gt_cells))
        instances.append(DetectionInstance(
            cls=cls, bbox=_jitter_box(rng, table.bbox, spec.jitter_px, w, h), score=1.0))
        if borderless_class:
            for c in table.cells:
                if not c.empty:
                    instances.append(DetectionInstance(
                        cls=CELL,
                        bbox=_jitter_box(rng, c.rect, spec.jitter_px, w, h),
                        score=1.0))

    gt = GroundTruthPage(image_id, w, h, tuple(gt_tables))
    detections = PageDetections(image_id, w, h, tuple(instances))
    doc = SynthDocument(image_id, GrayImage(canvas), gt, detections, tuple(tables))
    _assert_gt_invariants(doc)
    return doc


def _assert_gt_invariants(doc: SynthDocument) -> None:
    for table in doc.tables:
        claimed = set()
        for c in table.cells:
            slots = {(r, k) for r in range(c.r0, c.r1) for k in range(c.c0, c.c1)}
            if claimed & slots:
                raise AssertionError("generated cell spans overlap")
            claimed |= slots
        if claimed != {(r, k) for r in range(table.n_rows) for k in range(table.n_cols)}:
            raise AssertionError("generated cells do not tile the grid")


def generate(spec: SynthSpec, n_pages: int, workers: int | None = None) -> list[SynthDocument]:
    """Render n_pages documents; identical spec and count give identical output."""
    if n_pages < 0:
        raise ValueError("n_pages must be >= 0")
    if n_pages == 0:
        return []
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda i: _generate_page(spec, i), range(n_pages)))
    return [_generate_page(spec, i) for i in range(n_pages)]


def corrupt_detections(doc: SynthDocument, drop_frac: float, jitter: int, seed: int,
                       ensure_coverage: bool = False) -> PageDetections:
    """Drop a seeded fraction of cell instances and jitter what remains.

    Tables are never dropped. round(drop_frac * n_cells) cells go away,
    chosen by a seeded shuffle; with ensure_coverage every row keeps a 1-tall
    and every column a 1-wide cell per table (the drop may then fall short of
    the requested count).
    """
    if not (0.0 <= drop_frac < 1.0):
        raise ValueError("drop_frac must be in [0, 1)")
    rng = Xorshift64Star(seed)
    page = doc.perfect_detections
    cell_idx = [i for i, inst in enumerate(page.instances) if inst.cls == CELL]
    k = int(round(drop_frac * len(cell_idx)))
    order = rng.shuffle(list(cell_idx))
    dropped: set[int] = set()
    if not ensure_coverage:
        dropped = set(order[:k])
    elif k > 0:
        cover = _coverage_index(doc, page)
        row_left: dict = {}
        col_left: dict = {}
        n_left: dict = {}
        wide_left: dict = {}
        tall_left: dict = {}
        for i in cell_idx:
            tbl, span = cover[i]
            n_left[tbl] = n_left.get(tbl, 0) + 1
            if span[1] - span[0] == 1:
                row_left[(tbl, span[0])] = row_left.get((tbl, span[0]), 0) + 1
            else:
                tall_left[tbl] = tall_left.get(tbl, 0) + 1
            if span[3] - span[2] == 1:
                col_left[(tbl, span[2])] = col_left.get((tbl, span[2]), 0) + 1
            else:
                wide_left[tbl] = wide_left.get(tbl, 0) + 1
        for i in order:
            if len(dropped) == k:
                break
            tbl, span = cover[i]
            is_tall = span[1] - span[0] > 1
            is_wide = span[3] - span[2] > 1
            row_key = None if is_tall else (tbl, span[0])
            col_key = None if is_wide else (tbl, span[2])
            if row_key and row_left[row_key] <= 1:
                continue
            if col_key and col_left[col_key] <= 1:
                continue
            # keep multi-slot cells a strict per-axis minority after the drop,
            # matching the generator's own guarantee
            n_after = n_left[tbl] - 1
            if (wide_left.get(tbl, 0) - is_wide > (n_after - 1) // 2
                    or tall_left.get(tbl, 0) - is_tall > (n_after - 1) // 2):
                continue
            dropped.add(i)
            n_left[tbl] = n_after
            if row_key:
                row_left[row_key] -= 1
            if col_key:
                col_left[col_key] -= 1
            if is_wide:
                wide_left[tbl] -= 1
            if is_tall:
                tall_left[tbl] -= 1
    kept = []
    for i, inst in enumerate(page.instances):
        if i in dropped:
            continue
        kept.append(DetectionInstance(
            cls=inst.cls,
            bbox=_jitter_box(rng, inst.bbox, jitter, page.width, page.height),
            score=inst.score, mask=inst.mask))
    return PageDetections(page.image_id, page.width, page.height, tuple(kept))


def _coverage_index(doc: SynthDocument, page: PageDetections) -> dict:
    """instance index -> (table index, gt span) for cell instances, matching
    each detection to the nearest ground-truth cell by center containment."""
    out = {}
    for i, inst in enumerate(page.instances):
        if inst.cls != CELL:
            continue
        cx, cy = inst.bbox.center
        for ti, table in enumerate(doc.tables):
            if not table.bbox.contains_point(cx, cy):
                continue
            best, best_d = None, None
            for c in table.cells:
                if c.empty:
                    continue
                ccx, ccy = c.rect.center
                d = (ccx - cx) ** 2 + (ccy - cy) ** 2
                if best_d is None or d < best_d:
                    best, best_d = c, d
            if best is not None:
                out[i] = (ti, (best.r0, best.r1, best.c0, best.c1))
            break
    return out


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_corpus(docs: list[SynthDocument], out_dir: str | Path,
                 spec: SynthSpec | None = None) -> dict:
    """Write page PNGs, gt.json, detections.json, and a hash manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for doc in docs:
        name = f"{doc.image_id}.png"
        imgio.write_gray(doc.image, out_dir / name)
        entries.append({"image_id": doc.image_id, "image": name,
                        "sha256": _sha256(out_dir / name)})
    (out_dir / "gt.json").write_text(
        serialize_ground_truth([d.gt for d in docs]), encoding="utf-8")
    (out_dir / "detections.json").write_text(
        serialize_detections([d.perfect_detections for d in docs]), encoding="utf-8")
    manifest = {
        "format_version": "1",
        "pages": entries,
        "gt": {"file": "gt.json", "sha256": _sha256(out_dir / "gt.json")},
        "detections": {"file": "detections.json",
                       "sha256": _sha256(out_dir / "detections.json")},
    }
    if spec is not None:
        manifest["spec"] = spec.to_dict()
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest
