#!/usr/bin/env python3
"""End-to-end oracle experiment: generate a synthetic corpus, run structure
recognition on the perfect detections (optionally corrupted), and report how
often the recovered structures match the generated ground truth exactly.

Example:
    python scripts/round_trip_experiment.py --pages 50 --jitter 2 --drop 0.25
"""
import argparse
import time

from tabrec.cli import recognize_page
from tabrec.config import PipelineConfig
from tabrec.synthgen import SynthSpec, corrupt_detections, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pages", type=int, default=50)
    ap.add_argument("--seed", type=int, default=20240817)
    ap.add_argument("--jitter", type=int, default=2)
    ap.add_argument("--span-prob", type=float, default=0.18)
    ap.add_argument("--empty-prob", type=float, default=0.1)
    ap.add_argument("--drop", type=float, default=0.0,
                    help="fraction of cell detections to drop before recognition")
    args = ap.parse_args()

    spec = SynthSpec(seed=args.seed, jitter_px=args.jitter,
                     span_prob=args.span_prob, empty_cell_prob=args.empty_prob)
    cfg = PipelineConfig()
    started = time.perf_counter()
    docs = generate(spec, args.pages)
    stats = {"bordered": [0, 0], "borderless": [0, 0], "semi_bordered": [0, 0]}
    for doc in docs:
        detections = doc.perfect_detections
        if args.drop > 0:
            detections = corrupt_detections(doc, args.drop, 0, seed=doc.gt.width + 7,
                                            ensure_coverage=True)
        structures = recognize_page(doc.image, detections, cfg)
        gts = sorted(doc.tables, key=lambda t: (t.bbox.y0, t.bbox.x0))
        for s, g in zip(structures, gts):
            shape_ok = (s.n_rows, s.n_cols) == (g.n_rows, g.n_cols)
            if g.gen_type == "bordered":
                exact = shape_ok and s.span_map() == {(c.r0, c.r1, c.c0, c.c1)
                                                      for c in g.cells}
            elif args.drop > 0:
                exact = shape_ok  # occupancy legitimately shifts to recovered cells
            else:
                exact = (shape_ok and s.span_map() == g.span_map()
                         and s.occupied_slots() == g.occupied_slots())
            bucket = stats[g.gen_type]
            bucket[0] += exact
            bucket[1] += 1
    elapsed = time.perf_counter() - started
    print(f"{args.pages} pages, jitter {args.jitter}px, drop {args.drop:.0%}, "
          f"{elapsed:.1f}s")
    for kind, (ok, total) in stats.items():
        if total:
            print(f"  {kind:<14} {ok}/{total} exact ({ok / total:.1%})")


if __name__ == "__main__":
    main()
