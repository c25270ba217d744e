"""adapter CLI: `adapter infer` emits detection JSON for a directory of page
images (real model or ground-truth-backed stub); `adapter convert` turns
COCO / ICDAR-19 annotations into ground-truth JSON."""
from __future__ import annotations

import argparse
import sys

from .config import AdapterConfig
from .convert import ConvertError, convert_annotations, write_ground_truth
from .infer import AdapterError, run_inference, write_detections


def cmd_infer(args) -> int:
    try:
        config = AdapterConfig.load(args.config)
        result = run_inference(args.images, config)
    except (AdapterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_detections(result, args.out)
    if result.dropped_labels:
        print(f"warning: dropped {result.dropped_labels} instances with unmapped labels",
              file=sys.stderr)
    print(f"wrote {len(result.document['pages'])} pages to {args.out}")
    return 0


def cmd_convert(args) -> int:
    try:
        config = AdapterConfig.load(args.config)
        result = convert_annotations(args.in_path, args.format, config.class_map,
                                     images_dir=args.images,
                                     table_class=args.table_class)
    except (ConvertError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_ground_truth(result, args.out)
    notes = []
    if result.dropped_degenerate:
        notes.append(f"{result.dropped_degenerate} degenerate annotations dropped")
    if result.skipped_cells:
        notes.append(f"{result.skipped_cells} cell annotations skipped (no span data)")
    if result.dropped_labels:
        notes.append(f"{result.dropped_labels} unmapped labels dropped")
    if notes:
        print("warning: " + "; ".join(notes), file=sys.stderr)
    print(f"wrote {len(result.document['pages'])} pages to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adapter",
                                     description="Detection-model boundary tool")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="run a model or the gt-backed stub over images")
    p.add_argument("--images", required=True)
    p.add_argument("--config", help="AdapterConfig JSON (default: stub, identity map)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("convert", help="convert annotations to ground-truth JSON")
    p.add_argument("--format", choices=["coco", "icdar19"], required=True)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--images", help="images directory (required for icdar19)")
    p.add_argument("--config", help="AdapterConfig JSON for the class map")
    p.add_argument("--table-class", choices=["bordered_table", "borderless_table"],
                   default="borderless_table",
                   help="class for icdar19 tables (the format carries none)")
    p.set_defaults(fn=cmd_convert)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
