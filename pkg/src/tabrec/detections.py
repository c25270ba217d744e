"""The detection-JSON boundary contract: typed instances, strict parsing and
validation, score filtering, and cell-to-table assignment.

Invalid input is rejected, never repaired. Parse errors carry the byte offset;
validation errors name the image_id, the instance index, and the violated
rule.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .raster import BBox

FORMAT_VERSION = "1"

BORDERED_TABLE = "bordered_table"
BORDERLESS_TABLE = "borderless_table"
CELL = "cell"
DETECTION_CLASSES = (BORDERED_TABLE, BORDERLESS_TABLE, CELL)
TABLE_CLASSES = (BORDERED_TABLE, BORDERLESS_TABLE)

MASK_BBOX_SLACK = 2  # px a mask's tight box may overhang the instance bbox


class DetectionParseError(ValueError):
    """Malformed JSON; byte_offset points at the first offending byte."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class DetectionValidationError(ValueError):
    """Schema or invariant violation in otherwise well-formed JSON."""

    def __init__(self, rule: str, image_id: str | None = None, index: int | None = None):
        where = []
        if image_id is not None:
            where.append(f"image_id={image_id!r}")
        if index is not None:
            where.append(f"instance {index}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + rule)
        self.rule = rule
        self.image_id = image_id
        self.index = index


@dataclass(frozen=True)
class DetectionInstance:
    cls: str
    bbox: BBox
    score: float
    mask: tuple[tuple[int, int], ...] | None = None


@dataclass(frozen=True)
class PageDetections:
    image_id: str
    width: int
    height: int
    instances: tuple[DetectionInstance, ...]

    def tables(self) -> list[DetectionInstance]:
        return [i for i in self.instances if i.cls in TABLE_CLASSES]

    def cells(self) -> list[DetectionInstance]:
        return [i for i in self.instances if i.cls == CELL]


@dataclass(frozen=True)
class GroundTruthCell:
    bbox: BBox
    row: tuple[int, int]
    col: tuple[int, int]


@dataclass(frozen=True)
class GroundTruthTable:
    cls: str
    bbox: BBox
    cells: tuple[GroundTruthCell, ...] = ()


@dataclass(frozen=True)
class GroundTruthPage:
    image_id: str
    width: int
    height: int
    tables: tuple[GroundTruthTable, ...]


def _decode(document: bytes | str) -> object:
    if isinstance(document, bytes):
        try:
            text = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DetectionParseError("input is not valid UTF-8", exc.start) from exc
    else:
        text = document
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        byte_offset = len(text[:exc.pos].encode("utf-8"))
        raise DetectionParseError(exc.msg, byte_offset) from exc


def _require(cond: bool, rule: str, image_id: str | None = None, index: int | None = None):
    if not cond:
        raise DetectionValidationError(rule, image_id, index)


def _check_root(doc: object) -> list:
    _require(isinstance(doc, dict), "top level must be a JSON object")
    _require(doc.get("format_version") == FORMAT_VERSION,
             f'format_version must be "{FORMAT_VERSION}"')
    pages = doc.get("pages")
    _require(isinstance(pages, list), '"pages" must be a list')
    return pages


def _parse_bbox(raw: object, page_w: int, page_h: int,
                image_id: str, index: int | None, what: str = "bbox") -> BBox:
    _require(isinstance(raw, list) and len(raw) == 4
             and all(isinstance(v, int) for v in raw),
             f"{what} must be a list of 4 integers", image_id, index)
    x0, y0, x1, y1 = raw
    _require(x1 > x0 and y1 > y0, f"{what} must be non-empty (x1>x0, y1>y0)", image_id, index)
    _require(0 <= x0 and 0 <= y0 and x1 <= page_w and y1 <= page_h,
             f"{what} must lie within the page bounds", image_id, index)
    return BBox(x0, y0, x1, y1)


def _parse_page_header(raw: object) -> tuple[str, int, int]:
    _require(isinstance(raw, dict), "each page must be a JSON object")
    image_id = raw.get("image_id")
    _require(isinstance(image_id, str) and image_id != "", 'page needs a non-empty "image_id"')
    width, height = raw.get("width"), raw.get("height")
    _require(isinstance(width, int) and width >= 1, '"width" must be a positive integer', image_id)
    _require(isinstance(height, int) and height >= 1, '"height" must be a positive integer', image_id)
    return image_id, width, height


def _parse_instance(raw: object, page_w: int, page_h: int,
                    image_id: str, index: int) -> DetectionInstance:
    _require(isinstance(raw, dict), "instance must be a JSON object", image_id, index)
    cls = raw.get("class")
    _require(cls in DETECTION_CLASSES,
             f'"class" must be one of {list(DETECTION_CLASSES)}', image_id, index)
    bbox = _parse_bbox(raw.get("bbox"), page_w, page_h, image_id, index)
    score = raw.get("score")
    _require(isinstance(score, (int, float)) and not isinstance(score, bool),
             '"score" must be a number', image_id, index)
    _require(0.0 <= score <= 1.0, "score out of range [0, 1]", image_id, index)
    mask = None
    if "mask" in raw and raw["mask"] is not None:
        raw_mask = raw["mask"]
        _require(isinstance(raw_mask, list) and len(raw_mask) >= 3,
                 "mask must list at least 3 vertices", image_id, index)
        for v in raw_mask:
            _require(isinstance(v, list) and len(v) == 2
                     and all(isinstance(c, int) for c in v),
                     "mask vertices must be [x, y] integer pairs", image_id, index)
        xs = [v[0] for v in raw_mask]
        ys = [v[1] for v in raw_mask]
        _require(min(xs) >= bbox.x0 - MASK_BBOX_SLACK and min(ys) >= bbox.y0 - MASK_BBOX_SLACK
                 and max(xs) <= bbox.x1 + MASK_BBOX_SLACK and max(ys) <= bbox.y1 + MASK_BBOX_SLACK,
                 f"mask extent must lie within bbox expanded by {MASK_BBOX_SLACK} px",
                 image_id, index)
        mask = tuple((v[0], v[1]) for v in raw_mask)
    return DetectionInstance(cls=cls, bbox=bbox, score=float(score), mask=mask)


def parse_detections(document: bytes | str) -> list[PageDetections]:
    """Parse and fully validate a detection JSON document."""
    pages_raw = _check_root(_decode(document))
    pages = []
    for raw in pages_raw:
        image_id, width, height = _parse_page_header(raw)
        instances_raw = raw.get("instances")
        _require(isinstance(instances_raw, list), '"instances" must be a list', image_id)
        instances = tuple(_parse_instance(inst, width, height, image_id, i)
                          for i, inst in enumerate(instances_raw))
        pages.append(PageDetections(image_id, width, height, instances))
    return pages


def serialize_detections(pages: Iterable[PageDetections]) -> str:
    doc = {"format_version": FORMAT_VERSION, "pages": []}
    for page in pages:
        instances = []
        for inst in page.instances:
            entry: dict = {"class": inst.cls, "bbox": inst.bbox.as_list()}
            if inst.mask is not None:
                entry["mask"] = [[x, y] for x, y in inst.mask]
            entry["score"] = inst.score
            instances.append(entry)
        doc["pages"].append({"image_id": page.image_id, "width": page.width,
                             "height": page.height, "instances": instances})
    return json.dumps(doc, indent=2) + "\n"


def _parse_gt_cell(raw: object, page_w: int, page_h: int,
                   image_id: str, index: int) -> GroundTruthCell:
    _require(isinstance(raw, dict), "cell must be a JSON object", image_id, index)
    bbox = _parse_bbox(raw.get("bbox"), page_w, page_h, image_id, index, what="cell bbox")
    spans = []
    for key in ("row", "col"):
        span = raw.get(key)
        _require(isinstance(span, list) and len(span) == 2
                 and all(isinstance(v, int) for v in span),
                 f'cell "{key}" must be [start, end] integers', image_id, index)
        _require(0 <= span[0] < span[1],
                 f'cell "{key}" span must satisfy 0 <= start < end', image_id, index)
        spans.append((span[0], span[1]))
    return GroundTruthCell(bbox=bbox, row=spans[0], col=spans[1])


def parse_ground_truth(document: bytes | str) -> list[GroundTruthPage]:
    """Parse and fully validate a ground-truth JSON document."""
    pages_raw = _check_root(_decode(document))
    pages = []
    for raw in pages_raw:
        image_id, width, height = _parse_page_header(raw)
        tables_raw = raw.get("tables")
        _require(isinstance(tables_raw, list), '"tables" must be a list', image_id)
        tables = []
        for i, traw in enumerate(tables_raw):
            _require(isinstance(traw, dict), "table must be a JSON object", image_id, i)
            cls = traw.get("class")
            _require(cls in TABLE_CLASSES,
                     f'table "class" must be one of {list(TABLE_CLASSES)}', image_id, i)
            bbox = _parse_bbox(traw.get("bbox"), width, height, image_id, i, what="table bbox")
            cells = ()
            if "cells" in traw and traw["cells"] is not None:
                _require(isinstance(traw["cells"], list), '"cells" must be a list', image_id, i)
                cells = tuple(_parse_gt_cell(c, width, height, image_id, i)
                              for c in traw["cells"])
            tables.append(GroundTruthTable(cls=cls, bbox=bbox, cells=cells))
        pages.append(GroundTruthPage(image_id, width, height, tuple(tables)))
    return pages


def serialize_ground_truth(pages: Iterable[GroundTruthPage]) -> str:
    doc = {"format_version": FORMAT_VERSION, "pages": []}
    for page in pages:
        tables = []
        for t in page.tables:
            entry: dict = {"class": t.cls, "bbox": t.bbox.as_list()}
            if t.cells:
                entry["cells"] = [{"bbox": c.bbox.as_list(),
                                   "row": list(c.row), "col": list(c.col)}
                                  for c in t.cells]
            tables.append(entry)
        doc["pages"].append({"image_id": page.image_id, "width": page.width,
                             "height": page.height, "tables": tables})
    return json.dumps(doc, indent=2) + "\n"


def filter_by_score(page: PageDetections, threshold: float) -> PageDetections:
    """Keep instances with score >= threshold, preserving order."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must be within [0, 1]")
    kept = tuple(i for i in page.instances if i.score >= threshold)
    return PageDetections(page.image_id, page.width, page.height, kept)


def assign_cells(page: PageDetections) -> tuple[list[tuple[DetectionInstance, list[DetectionInstance]]],
                                                list[DetectionInstance]]:
    """Group cell instances under their parent borderless tables.

    A cell belongs to the borderless table whose bbox contains the cell's
    bbox center; when several contain it, the smallest-area table wins.
    Bordered tables always receive an empty group. Returns (assignments,
    dropped) where dropped holds cells whose center lies in no borderless
    table; every input cell lands in exactly one of the two.
    """
    tables = page.tables()
    assignments: list[tuple[DetectionInstance, list[DetectionInstance]]] = [
        (t, []) for t in tables]
    borderless = [(idx, t) for idx, t in enumerate(tables) if t.cls == BORDERLESS_TABLE]
    dropped: list[DetectionInstance] = []
    for cell in page.cells():
        cx, cy = cell.bbox.center
        candidates = [(t.bbox.area, idx) for idx, t in borderless
                      if t.bbox.contains_point(cx, cy)]
        if not candidates:
            dropped.append(cell)
            continue
        _, best = min(candidates)
        assignments[best][1].append(cell)
    return assignments, dropped
