"""Training-time document-image augmentations: ink thickening (dilation) and
distance-field smudging, plus batch corpus augmentation.

Both transforms preserve image dimensions, so box annotations on the original
page stay valid on the transformed page.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import imgio
from .raster import BinaryImage, GrayImage, binarize, dilate_binary, distance_transform, render_binary

SMUDGE_CHANNEL_METRICS = ("euclidean", "cityblock", "chessboard")


@dataclass(frozen=True)
class ColorImage:
    """Three 8-bit planes stacked as (h, w, 3); channel order is
    (euclidean, cityblock, chessboard)."""

    planes: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.planes, dtype=np.uint8)
        if p.ndim != 3 or p.shape[2] != 3:
            raise ValueError(f"ColorImage needs an (h, w, 3) array, got {p.shape}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "planes", p)

    @property
    def width(self) -> int:
        return self.planes.shape[1]

    @property
    def height(self) -> int:
        return self.planes.shape[0]


@dataclass(frozen=True)
class SmudgeParams:
    """Knobs of the smudge transform; distances >= cap_distance render white."""

    cap_distance: int = 15
    binarize_method: str = "otsu"
    fixed_threshold: int | None = None

    def __post_init__(self):
        if self.cap_distance < 1:
            raise ValueError("cap_distance must be >= 1")


def dilation_transform(img: GrayImage, kw: int = 2, kh: int = 2, iterations: int = 1) -> GrayImage:
    """Thicken ink: binarize (Otsu), dilate with the 2x2 kernel once, render."""
    ink = binarize(img, "otsu")
    return render_binary(dilate_binary(ink, kw, kh, iterations))


def _smudge_channel(ink: BinaryImage, metric: str, cap: int) -> np.ndarray:
    d = distance_transform(ink, metric).values
    return np.rint(255.0 * np.minimum(d, cap) / cap).astype(np.uint8)


def smudge_transform(img: GrayImage, params: SmudgeParams = SmudgeParams()) -> ColorImage:
    """Encode capped distance-to-ink under three metrics as image channels.

    Ink pixels map to 0 in every channel; pixels cap_distance or farther from
    any ink map to 255; in between the ramp is linear.
    """
    ink = binarize(img, params.binarize_method, params.fixed_threshold)
    planes = np.stack(
        [_smudge_channel(ink, m, params.cap_distance) for m in SMUDGE_CHANNEL_METRICS],
        axis=2)
    return ColorImage(planes)


def _list_images(input_dir: Path) -> list[Path]:
    return sorted(p for p in input_dir.iterdir()
                  if p.is_file() and p.suffix.lower() in imgio.GRAY_SUFFIXES)


def _augment_one(src: Path, output_dir: Path, modes: list[str],
                 smudge_params: SmudgeParams) -> list[dict]:
    try:
        img = imgio.read_gray(src)
    except Exception as exc:
        return [{"original": src.name, "output": None,
                 "mode": "skipped", "error": str(exc)}]
    orig_out = output_dir / src.name
    imgio.write_gray(img, orig_out)
    entries = [{"original": src.name, "output": orig_out.name, "mode": "original"}]
    for m in modes:
        if m == "dilate":
            out_name = f"{src.stem}_dilate.png"
            imgio.write_gray(dilation_transform(img), output_dir / out_name)
        else:
            out_name = f"{src.stem}_smudge.png"
            imgio.write_rgb(smudge_transform(img, smudge_params).planes,
                            output_dir / out_name)
        entries.append({"original": src.name, "output": out_name, "mode": m})
    return entries


def augment_corpus(input_dir: str | Path, output_dir: str | Path, mode: str = "both",
                   smudge_params: SmudgeParams = SmudgeParams(),
                   workers: int = 1) -> list[dict]:
    """Write originals plus transformed copies for every readable image.

    mode selects dilate, smudge, or both. Returns the manifest: one
    {original, output, mode} entry per written file, plus
    {original, output: None, mode: "skipped", error} entries for unreadable
    inputs. Entries are ordered by input filename, then mode, regardless of
    worker count.
    """
    if mode not in ("dilate", "smudge", "both"):
        raise ValueError(f"unknown augmentation mode {mode!r}")
    modes = ["dilate", "smudge"] if mode == "both" else [mode]
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    sources = _list_images(Path(input_dir))
    if workers > 1 and len(sources) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_image = list(pool.map(
                lambda s: _augment_one(s, output_dir, modes, smudge_params), sources))
    else:
        per_image = [_augment_one(s, output_dir, modes, smudge_params)
                     for s in sources]
    return [entry for entries in per_image for entry in entries]


def write_manifest(manifest: list[dict], path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
