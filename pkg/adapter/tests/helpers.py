"""Shared fixtures: a tiny synthetic corpus from the primary toolkit (its
published file formats are the adapter's contract) and minimal page images."""
from pathlib import Path

import numpy as np
from PIL import Image


def write_blank_image(path: Path, width: int = 64, height: int = 48) -> None:
    Image.fromarray(np.full((height, width), 255, np.uint8), mode="L").save(path)


def make_corpus(out_dir: Path, pages: int = 2, jitter: int = 0,
                table_types=("bordered", "borderless", "semi_bordered")):
    from tabrec.synthgen import SynthSpec, generate, write_corpus
    spec = SynthSpec(seed=99, jitter_px=jitter, table_types=tuple(table_types),
                     tables_per_page=(1, 2))
    docs = generate(spec, pages)
    write_corpus(docs, out_dir, spec)
    return out_dir, docs
