"""Grayscale PNG / PGM (P5) image I/O.

Binary images serialize with foreground rendered as 0 (ink) on 255 (paper).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .raster import BinaryImage, GrayImage, render_binary

GRAY_SUFFIXES = {".png", ".pgm"}


def read_gray(path: str | Path) -> GrayImage:
    """Read an 8-bit grayscale PNG or PGM; other modes collapse to luminance."""
    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("L")
        return GrayImage(np.asarray(im, dtype=np.uint8))


def write_gray(img: GrayImage, path: str | Path) -> None:
    path = Path(path)
    pil = Image.fromarray(np.asarray(img.pixels), mode="L")
    if path.suffix.lower() == ".pgm":
        pil.save(path, format="PPM")  # Pillow emits P5 for L-mode
    else:
        pil.save(path, format="PNG")


def write_binary(img: BinaryImage, path: str | Path) -> None:
    write_gray(render_binary(img), path)


def write_rgb(planes: np.ndarray, path: str | Path) -> None:
    """Write an (h, w, 3) uint8 array as RGB PNG."""
    if planes.ndim != 3 or planes.shape[2] != 3:
        raise ValueError("expected an (h, w, 3) array")
    Image.fromarray(np.ascontiguousarray(planes, dtype=np.uint8), mode="RGB").save(
        path, format="PNG")


def read_rgb(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)
