"""Annotation format converters producing the toolkit's ground-truth JSON.

COCO instance JSON: bbox [x, y, w, h] becomes [x, y, x+w, y+h]; polygon
segmentations fall back to their tight box when no bbox is present. Cell
categories are skipped (the ground-truth schema needs row/col span indices
COCO does not carry) and counted. ICDAR-19 Track-A XML carries table polygons
only; page sizes come from the matching images, so conversion needs the
images directory.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

FORMAT_VERSION = "1"
TABLE_CLASSES = ("bordered_table", "borderless_table")


class ConvertError(ValueError):
    pass


@dataclass
class ConversionResult:
    document: dict
    dropped_degenerate: int
    skipped_cells: int
    dropped_labels: int


def xywh_to_xyxy(bbox) -> list[int]:
    x, y, w, h = bbox
    return [int(round(x)), int(round(y)), int(round(x + w)), int(round(y + h))]


def _polygon_bbox(segmentation) -> list[int] | None:
    xs, ys = [], []
    polygons = segmentation if isinstance(segmentation[0], (list, tuple)) else [segmentation]
    for poly in polygons:
        xs.extend(poly[0::2])
        ys.extend(poly[1::2])
    if not xs:
        return None
    return [int(round(min(xs))), int(round(min(ys))),
            int(round(max(xs))), int(round(max(ys)))]


def _clip(box: list[int], width: int, height: int) -> list[int]:
    return [max(0, min(box[0], width)), max(0, min(box[1], height)),
            max(0, min(box[2], width)), max(0, min(box[3], height))]


def convert_coco(raw: dict, class_map: dict) -> ConversionResult:
    categories = {c["id"]: c["name"] for c in raw.get("categories", [])}
    images = {im["id"]: im for im in raw.get("images", [])}
    pages: dict = {}
    for image_id, im in images.items():
        stem = Path(im.get("file_name", str(image_id))).stem
        pages[image_id] = {"image_id": stem, "width": int(im["width"]),
                           "height": int(im["height"]), "tables": []}
    dropped_degenerate = skipped_cells = dropped_labels = 0
    for ann in raw.get("annotations", []):
        page = pages.get(ann.get("image_id"))
        if page is None:
            continue
        name = categories.get(ann.get("category_id"))
        cls = class_map.get(name)
        if cls is None:
            dropped_labels += 1
            continue
        if cls == "cell":
            skipped_cells += 1
            continue
        if ann.get("bbox"):
            box = xywh_to_xyxy(ann["bbox"])
        elif ann.get("segmentation"):
            box = _polygon_bbox(ann["segmentation"])
        else:
            box = None
        if box is not None:
            box = _clip(box, page["width"], page["height"])
        if box is None or box[2] <= box[0] or box[3] <= box[1]:
            dropped_degenerate += 1
            continue
        page["tables"].append({"class": cls, "bbox": box})
    document = {"format_version": FORMAT_VERSION,
                "pages": [pages[k] for k in sorted(pages, key=lambda k: pages[k]["image_id"])]}
    return ConversionResult(document, dropped_degenerate, skipped_cells, dropped_labels)


def _icdar_points(coords: str) -> list[tuple[int, int]]:
    points = []
    for token in coords.replace(";", " ").split():
        x, y = token.split(",")
        points.append((int(round(float(x))), int(round(float(y)))))
    return points


def convert_icdar19(xml_paths: list[Path], images_dir: Path,
                    table_class: str = "borderless_table") -> ConversionResult:
    if table_class not in TABLE_CLASSES:
        raise ConvertError(f"table_class must be one of {TABLE_CLASSES}")
    pages = []
    dropped_degenerate = 0
    for xml_path in sorted(xml_paths):
        root = ET.parse(xml_path).getroot()
        filename = root.get("filename") or xml_path.stem
        stem = Path(filename).stem
        image_path = None
        for suffix in (".png", ".pgm", ".jpg", ".jpeg", Path(filename).suffix):
            candidate = images_dir / f"{stem}{suffix}"
            if candidate.exists():
                image_path = candidate
                break
        if image_path is None:
            raise ConvertError(f"no image found for {xml_path.name} in {images_dir}")
        with Image.open(image_path) as im:
            width, height = im.size
        page = {"image_id": stem, "width": width, "height": height, "tables": []}
        for table in root.iter("table"):
            coords = table.find("Coords")
            if coords is None or not coords.get("points"):
                dropped_degenerate += 1
                continue
            points = _icdar_points(coords.get("points"))
            xs = [p[0] for p in points]
            ys = [p[1] for p in points]
            box = _clip([min(xs), min(ys), max(xs), max(ys)], width, height)
            if box[2] <= box[0] or box[3] <= box[1]:
                dropped_degenerate += 1
                continue
            page["tables"].append({"class": table_class, "bbox": box})
        pages.append(page)
    document = {"format_version": FORMAT_VERSION,
                "pages": sorted(pages, key=lambda p: p["image_id"])}
    return ConversionResult(document, dropped_degenerate, 0, 0)


def convert_annotations(in_path: str | Path, fmt: str, class_map: dict,
                        images_dir: str | Path | None = None,
                        table_class: str = "borderless_table") -> ConversionResult:
    in_path = Path(in_path)
    if fmt == "coco":
        raw = json.loads(in_path.read_text(encoding="utf-8"))
        return convert_coco(raw, class_map)
    if fmt == "icdar19":
        if images_dir is None:
            raise ConvertError("icdar19 conversion needs --images to read page sizes")
        xml_paths = ([in_path] if in_path.is_file()
                     else sorted(in_path.glob("*.xml")))
        if not xml_paths:
            raise ConvertError(f"no XML annotations found at {in_path}")
        return convert_icdar19(xml_paths, Path(images_dir), table_class)
    raise ConvertError(f"unknown annotation format {fmt!r}")


def write_ground_truth(result: ConversionResult, out: str | Path) -> None:
    Path(out).write_text(json.dumps(result.document, indent=2) + "\n",
                         encoding="utf-8")
