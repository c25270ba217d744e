"""Pipeline tunables with their defaults and documented ranges.

Precedence when running the CLI: flags > config file > these defaults.
Unknown keys and out-of-range values are rejected.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class PipelineConfig:
    # detection intake
    score_threshold: float = 0.5        # [0, 1]
    # binarization
    binarize_method: str = "otsu"       # otsu | fixed
    fixed_threshold: int = 128          # 0..255, used when binarize_method == fixed
    # bordered branch
    min_len_frac: float = 0.5           # (0, 1]
    snap_tol: int = 5                   # >= 1
    line_thickness: int = 3             # >= 1, expected max rule thickness
    # borderless branch
    overlap_frac: float = 0.5           # (0, 1]
    span_extent_factor: float = 1.8     # > 1
    margin: int = 4                     # >= 0, separator-crossing tolerance;
                                        # must cover box jitter + separator error
                                        # (2 px each at the contract's +-2 px)
    recover_inset: int = 6              # >= 0, slot inset for text recovery
    # smudge transform
    smudge_cap: int = 15                # >= 1
    # text detection
    text_min_area: int = 4              # >= 1
    text_merge_gap_x: int = 8           # >= 0
    text_merge_gap_y: int = 2           # >= 0

    def __post_init__(self):
        checks = [
            (0.0 <= self.score_threshold <= 1.0, "score_threshold in [0, 1]"),
            (self.binarize_method in ("otsu", "fixed"), "binarize_method otsu|fixed"),
            (0 <= self.fixed_threshold <= 255, "fixed_threshold in 0..255"),
            (0.0 < self.min_len_frac <= 1.0, "min_len_frac in (0, 1]"),
            (self.snap_tol >= 1, "snap_tol >= 1"),
            (self.line_thickness >= 1, "line_thickness >= 1"),
            (0.0 < self.overlap_frac <= 1.0, "overlap_frac in (0, 1]"),
            (self.span_extent_factor > 1.0, "span_extent_factor > 1"),
            (self.margin >= 0, "margin >= 0"),
            (self.recover_inset >= 0, "recover_inset >= 0"),
            (self.smudge_cap >= 1, "smudge_cap >= 1"),
            (self.text_min_area >= 1, "text_min_area >= 1"),
            (self.text_merge_gap_x >= 0, "text_merge_gap_x >= 0"),
            (self.text_merge_gap_y >= 0, "text_merge_gap_y >= 0"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ValueError(f"config violates: {rule}")

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **overrides) -> "PipelineConfig":
        merged = {**asdict(self), **overrides}
        return PipelineConfig(**merged)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Build the effective config: defaults, then file values, then overrides."""
    values: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        values.update(raw)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**values)
