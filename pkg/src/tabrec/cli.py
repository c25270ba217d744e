"""Command-line entry point: augment, recognize, evaluate, synth.

Exit codes are pinned for CI: 0 success, 1 fatal/validation error, 2 partial
success (augment skipped at least one file). All outputs are byte-stable for
identical inputs: JSON carries no timestamps and manifests carry data hashes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import imgio, metrics, synthgen, transforms
from .bordered import bordered_structure
from .borderless import borderless_structure
from .config import PipelineConfig, load_config
from .detections import (BORDERED_TABLE, DetectionParseError, DetectionValidationError,
                         assign_cells, filter_by_score, parse_detections,
                         parse_ground_truth)
from .raster import binarize
from .structure import TableStructure

CONFIG_ENV_VAR = "TABSTRUCT_CONFIG"


def _effective_config(args) -> PipelineConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR) or None
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        overrides[key] = json.loads(raw)
    return load_config(path, overrides)


def _workers(args) -> int:
    n = getattr(args, "workers", None)
    return n if n and n > 0 else (os.cpu_count() or 1)


def cmd_augment(args) -> int:
    cfg = _effective_config(args)
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    if not in_dir.is_dir():
        print(f"error: input directory {in_dir} does not exist", file=sys.stderr)
        return 1
    manifest = transforms.augment_corpus(
        in_dir, out_dir, args.mode,
        transforms.SmudgeParams(cap_distance=cfg.smudge_cap,
                                binarize_method=cfg.binarize_method,
                                fixed_threshold=cfg.fixed_threshold),
        workers=_workers(args))
    transforms.write_manifest(manifest, out_dir / "manifest.json")
    skipped = [m for m in manifest if m["mode"] == "skipped"]
    print(f"augmented {len(manifest) - len(skipped)} files, {len(skipped)} skipped")
    return 2 if skipped else 0


def recognize_page(image, page_dets, cfg: PipelineConfig, workers: int = 1) -> list[TableStructure]:
    """Route every table instance to its branch; results ordered by (y0, x0)."""
    page_dets = filter_by_score(page_dets, cfg.score_threshold)
    ink = binarize(image, cfg.binarize_method,
                   cfg.fixed_threshold if cfg.binarize_method == "fixed" else None)
    assignments, _dropped = assign_cells(page_dets)

    def run(one):
        table, cells = one
        if table.cls == BORDERED_TABLE:
            return bordered_structure(ink, table.bbox, cfg)
        return borderless_structure(ink, table.bbox, [c.bbox for c in cells], cfg)

    if workers > 1 and len(assignments) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            structures = list(pool.map(run, assignments))
    else:
        structures = [run(a) for a in assignments]
    return sorted(structures, key=lambda s: (s.table_bbox.y0, s.table_bbox.x0))


def cmd_recognize(args) -> int:
    try:
        cfg = _effective_config(args)
        image = imgio.read_gray(args.image)
        pages = parse_detections(Path(args.detections).read_bytes())
    except (DetectionParseError, DetectionValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    image_id = args.image_id or Path(args.image).stem
    matching = [p for p in pages if p.image_id == image_id]
    if not matching:
        print(f"error: no detections for image_id {image_id!r}", file=sys.stderr)
        return 1
    page = matching[0]
    if (page.width, page.height) != (image.width, image.height):
        print(f"error: [image_id={image_id!r}] detection page size "
              f"{page.width}x{page.height} != image size {image.width}x{image.height}",
              file=sys.stderr)
        return 1
    structures = recognize_page(image, page, cfg, _workers(args))
    doc = {"format_version": "1", "image_id": image_id,
           "tables": [s.to_dict() for s in structures]}
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(structures)} table structures to {args.out}")
    return 0


def _score_pages(pred_pages, gt_pages, cfg: PipelineConfig):
    """Pair prediction and ground-truth table boxes by image_id (sorted)."""
    preds = {p.image_id: p for p in pred_pages}
    gts = {g.image_id: g for g in gt_pages}
    ids = sorted(preds)
    pairs = []
    for image_id in ids:
        page = filter_by_score(preds[image_id], cfg.score_threshold)
        pairs.append(([t.bbox for t in page.tables()],
                      [t.bbox for t in gts[image_id].tables]))
    return ids, pairs


def cmd_evaluate(args) -> int:
    try:
        cfg = _effective_config(args)
        pred_pages = parse_detections(Path(args.pred).read_bytes())
        gt_pages = parse_ground_truth(Path(args.gt).read_bytes())
    except (DetectionParseError, DetectionValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    pred_ids = {p.image_id for p in pred_pages}
    gt_ids = {g.image_id for g in gt_pages}
    if pred_ids != gt_ids:
        diff = sorted(pred_ids ^ gt_ids)
        print(f"error: image_id sets differ; symmetric difference: {diff}",
              file=sys.stderr)
        return 1
    ids, pairs = _score_pages(pred_pages, gt_pages, cfg)
    report: dict = {"format_version": "1", "protocol": args.protocol,
                    "config": cfg.to_dict()}
    if args.protocol == "icdar19":
        result = metrics.icdar19_eval(pairs, image_ids=ids)
        report["thresholds"] = {
            f"{s.iou_threshold:.1f}": {"tp": s.tp, "fp": s.fp, "fn": s.fn,
                                       "precision": s.precision, "recall": s.recall,
                                       "f1": s.f1}
            for s in result.thresholds}
        report["weighted_avg_f1"] = result.weighted_avg_f1
        report["pages"] = [
            {"image_id": m.image_id, "iou_threshold": m.iou_threshold,
             "matches": [list(x) for x in m.matches],
             "unmatched_preds": list(m.unmatched_preds),
             "unmatched_gts": list(m.unmatched_gts)}
            for m in result.pages]
        header = "IoU      " + "".join(f"{s.iou_threshold:>8.1f}" for s in result.thresholds)
        f1_row = "F1       " + "".join(f"{s.f1:>8.3f}" for s in result.thresholds)
        print(header)
        print(f1_row + f"   WAvg. {result.weighted_avg_f1:.3f}")
    else:
        fn = metrics.tablebank_metrics if args.protocol == "tablebank" else metrics.icdar13_metrics
        try:
            precision, recall, f1 = fn(pairs)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        report.update({"precision": precision, "recall": recall, "f1": f1})
        print(f"precision {precision:.4f}  recall {recall:.4f}  f1 {f1:.4f}")
    Path(args.report).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_synth(args) -> int:
    try:
        raw = json.loads(Path(args.spec).read_text(encoding="utf-8")) if args.spec else {}
        spec = synthgen.SynthSpec.from_dict(raw)
        docs = synthgen.generate(spec, args.pages, workers=_workers(args))
    except (synthgen.SynthSpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    synthgen.write_corpus(docs, args.out, spec)
    print(f"wrote {len(docs)} pages to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabrec",
        description="Table structure recovery, augmentation, and evaluation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help=f"pipeline config JSON (or ${CONFIG_ENV_VAR})")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a single config value (repeatable)")
        p.add_argument("--workers", type=int, default=0,
                       help="worker pool size (default: all available cores)")

    p = sub.add_parser("augment", help="write augmented copies of a page-image corpus")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--mode", choices=["dilate", "smudge", "both"], default="both")
    add_common(p)
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("recognize", help="recover table structures for one page")
    p.add_argument("--image", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--image-id", help="detections page to use (default: image stem)")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(fn=cmd_recognize)

    p = sub.add_parser("evaluate", help="score detections against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--protocol", choices=["icdar19", "tablebank", "icdar13"],
                   default="icdar19")
    p.add_argument("--report", required=True)
    add_common(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--spec", help="SynthSpec JSON (defaults apply when omitted)")
    p.add_argument("--pages", type=int, required=True)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(fn=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
