"""Recovered table structure: the grid plus span-annotated cells.

Cell spans are half-open band-index rectangles; no two cells of a valid
structure may claim overlapping index rectangles.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .raster import BBox

SOURCE_MODEL = "model"
SOURCE_RECOVERED = "recovered"


@dataclass(frozen=True)
class StructureCell:
    r0: int
    r1: int
    c0: int
    c1: int
    bbox: BBox
    content: tuple[BBox, ...] = ()
    source: str = SOURCE_MODEL

    def __post_init__(self):
        if not (0 <= self.r0 < self.r1 and 0 <= self.c0 < self.c1):
            raise ValueError(f"bad cell span r=({self.r0},{self.r1}) c=({self.c0},{self.c1})")
        if self.source not in (SOURCE_MODEL, SOURCE_RECOVERED):
            raise ValueError(f"unknown cell source {self.source!r}")

    def slots(self) -> set[tuple[int, int]]:
        return {(r, c) for r in range(self.r0, self.r1) for c in range(self.c0, self.c1)}


@dataclass(frozen=True)
class TableStructure:
    table_bbox: BBox
    table_type: str  # "bordered" | "borderless"
    n_rows: int
    n_cols: int
    cells: tuple[StructureCell, ...]
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self):
        if self.table_type not in ("bordered", "borderless"):
            raise ValueError(f"unknown table_type {self.table_type!r}")
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("structure needs at least a 1x1 grid")
        claimed: set[tuple[int, int]] = set()
        for cell in self.cells:
            if cell.r1 > self.n_rows or cell.c1 > self.n_cols:
                raise ValueError(
                    f"cell span r=({cell.r0},{cell.r1}) c=({cell.c0},{cell.c1}) "
                    f"exceeds {self.n_rows}x{self.n_cols} grid")
            slots = cell.slots()
            if claimed & slots:
                raise ValueError("cell index rectangles overlap")
            claimed |= slots

    def occupied_slots(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for cell in self.cells:
            out |= cell.slots()
        return out

    def span_map(self) -> set[tuple[int, int, int, int]]:
        return {(c.r0, c.r1, c.c0, c.c1) for c in self.cells}

    def to_dict(self) -> dict:
        return {
            "bbox": self.table_bbox.as_list(),
            "type": self.table_type,
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "cells": [
                {
                    "row": [c.r0, c.r1],
                    "col": [c.c0, c.c1],
                    "bbox": c.bbox.as_list(),
                    "content": [b.as_list() for b in c.content],
                    "source": c.source,
                }
                for c in sorted(self.cells, key=lambda c: (c.r0, c.c0))
            ],
        }


def structure_from_dict(raw: dict) -> TableStructure:
    cells = tuple(
        StructureCell(
            r0=c["row"][0], r1=c["row"][1], c0=c["col"][0], c1=c["col"][1],
            bbox=BBox(*c["bbox"]),
            content=tuple(BBox(*b) for b in c.get("content", [])),
            source=c.get("source", SOURCE_MODEL),
        )
        for c in raw["cells"]
    )
    return TableStructure(
        table_bbox=BBox(*raw["bbox"]),
        table_type=raw["type"],
        n_rows=raw["n_rows"],
        n_cols=raw["n_cols"],
        cells=cells,
    )
