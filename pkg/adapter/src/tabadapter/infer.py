"""Inference over page images, emitting the detection JSON contract.

Stub mode reads ground-truth sidecars instead of running a network: a
per-image `<stem>.gt.json`, or a corpus-level `gt.json` in the images
directory. Tables become table instances; the cells of borderless tables
become cell instances (the model contract predicts cells only for those).
Model mode loads a TorchScript module lazily and maps its labeled boxes
through the configured class map.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

from .config import AdapterConfig

IMAGE_SUFFIXES = {".png", ".pgm"}
FORMAT_VERSION = "1"


class AdapterError(RuntimeError):
    pass


@dataclass
class InferenceResult:
    document: dict
    dropped_labels: int  # instances whose model label had no mapping


def list_images(images_dir: str | Path) -> list[Path]:
    images_dir = Path(images_dir)
    if not images_dir.is_dir():
        raise AdapterError(f"images directory {images_dir} does not exist")
    return sorted(p for p in images_dir.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _image_size(path: Path) -> tuple[int, int]:
    with Image.open(path) as im:
        return im.size


def _load_sidecar_gt(image_path: Path) -> dict | None:
    """Per-image sidecar first, corpus gt.json second; None when neither."""
    sidecar = image_path.with_suffix(".gt.json")
    if sidecar.exists():
        doc = json.loads(sidecar.read_text(encoding="utf-8"))
        pages = doc.get("pages", [doc] if "tables" in doc else [])
        return pages[0] if pages else None
    corpus = image_path.parent / "gt.json"
    if corpus.exists():
        doc = json.loads(corpus.read_text(encoding="utf-8"))
        for page in doc.get("pages", []):
            if page.get("image_id") == image_path.stem:
                return page
    return None


def _stub_page(image_path: Path, config: AdapterConfig,
               counters: dict) -> dict:
    width, height = _image_size(image_path)
    page = {"image_id": image_path.stem, "width": width, "height": height,
            "instances": []}
    gt = _load_sidecar_gt(image_path)
    if gt is None:
        return page
    page["width"] = gt.get("width", width)
    page["height"] = gt.get("height", height)
    for table in gt.get("tables", []):
        cls = config.class_map.get(table["class"])
        if cls is None:
            counters["dropped_labels"] += 1
            continue
        if 1.0 >= config.score_floor:
            page["instances"].append(
                {"class": cls, "bbox": list(table["bbox"]), "score": 1.0})
        if cls == "borderless_table":
            cell_cls = config.class_map.get("cell")
            for cell in table.get("cells", []):
                if cell_cls is None:
                    counters["dropped_labels"] += 1
                    continue
                page["instances"].append(
                    {"class": cell_cls, "bbox": list(cell["bbox"]), "score": 1.0})
    return page


def _load_model(config: AdapterConfig):
    try:
        import torch
    except ImportError as exc:
        raise AdapterError(
            "model mode needs torch; install the [model] extra") from exc
    try:
        model = torch.jit.load(config.model, map_location=config.device)
    except Exception as exc:
        raise AdapterError(f"cannot load model {config.model!r}: {exc}") from exc
    model.eval()
    return model, torch


def _model_page(model, torch, image_path: Path, config: AdapterConfig,
                counters: dict) -> dict:
    import numpy as np
    with Image.open(image_path) as im:
        rgb = im.convert("RGB")
        width, height = rgb.size
        tensor = torch.from_numpy(
            np.asarray(rgb, dtype="float32").transpose(2, 0, 1) / 255.0)
    with torch.no_grad():
        output = model(tensor.unsqueeze(0).to(config.device))
    if isinstance(output, (list, tuple)):
        output = output[0]
    page = {"image_id": image_path.stem, "width": width, "height": height,
            "instances": []}
    boxes = output["boxes"].cpu().numpy()
    labels = output["labels"].cpu().numpy()
    scores = output["scores"].cpu().numpy()
    for box, label, score in zip(boxes, labels, scores):
        if score < config.score_floor:
            continue
        idx = int(label)
        name = (config.label_names[idx]
                if idx < len(config.label_names) else str(idx))
        cls = config.class_map.get(name)
        if cls is None:
            counters["dropped_labels"] += 1
            continue
        x0, y0, x1, y1 = (int(round(v)) for v in box)
        x0, y0 = max(0, x0), max(0, y0)
        x1, y1 = min(width, x1), min(height, y1)
        if x1 <= x0 or y1 <= y0:
            continue
        page["instances"].append(
            {"class": cls, "bbox": [x0, y0, x1, y1], "score": float(score)})
    return page


def run_inference(images_dir: str | Path, config: AdapterConfig) -> InferenceResult:
    """One schema-valid page entry per image, ordered by filename."""
    images = list_images(images_dir)
    counters = {"dropped_labels": 0}
    if config.is_stub:
        pages = [_stub_page(p, config, counters) for p in images]
    else:
        model, torch = _load_model(config)
        pages = [_model_page(model, torch, p, config, counters) for p in images]
    document = {"format_version": FORMAT_VERSION, "pages": pages}
    return InferenceResult(document=document, dropped_labels=counters["dropped_labels"])


def write_detections(result: InferenceResult, out: str | Path) -> None:
    Path(out).write_text(json.dumps(result.document, indent=2) + "\n",
                         encoding="utf-8")
