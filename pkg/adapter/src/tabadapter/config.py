"""Adapter configuration: model source, label mapping, score floor."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

CONTRACT_CLASSES = ("bordered_table", "borderless_table", "cell")
STUB_MODEL = "stub"

DEFAULT_CLASS_MAP = {c: c for c in CONTRACT_CLASSES}


@dataclass(frozen=True)
class AdapterConfig:
    model: str = STUB_MODEL                       # "stub" or a TorchScript path
    class_map: dict = field(default_factory=lambda: dict(DEFAULT_CLASS_MAP))
    score_floor: float = 0.0
    device: str = "cpu"
    label_names: tuple[str, ...] = ()             # numeric model label -> name

    def __post_init__(self):
        object.__setattr__(self, "label_names", tuple(self.label_names))
        if set(self.class_map.values()) != set(CONTRACT_CLASSES):
            raise ValueError(
                f"class_map values must cover exactly {CONTRACT_CLASSES}, "
                f"got {sorted(set(self.class_map.values()))}")
        if not (0.0 <= self.score_floor <= 1.0):
            raise ValueError("score_floor must be in [0, 1]")

    @property
    def is_stub(self) -> bool:
        return self.model == STUB_MODEL

    @staticmethod
    def load(path: str | Path | None) -> "AdapterConfig":
        if path is None:
            return AdapterConfig()
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {"model", "class_map", "score_floor", "device", "label_names"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown adapter config keys: {sorted(unknown)}")
        return AdapterConfig(**raw)
