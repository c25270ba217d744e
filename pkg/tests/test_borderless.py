import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabrec.borderless import (Band, assign_spans, borderless_structure,
                               cluster_bands, estimate_separators,
                               recover_missing_cells)
from tabrec.cli import recognize_page
from tabrec.config import PipelineConfig
from tabrec.raster import BBox, BinaryImage
from tabrec.structure import SOURCE_MODEL, SOURCE_RECOVERED
from tabrec.synthgen import SynthSpec, generate


def ybox(y0, y1, x0=0, x1=10):
    return BBox(x0, y0, x1, y1)


class TestClusterBands:
    def test_single_cell_single_band(self):
        bands = cluster_bands([ybox(5, 25)], "row")
        assert len(bands) == 1
        assert (bands[0].start, bands[0].end) == (5, 25)

    def test_identical_intervals_one_band(self):
        bands = cluster_bands([ybox(0, 10, 0, 10), ybox(0, 10, 20, 30)], "row")
        assert len(bands) == 1

    def test_three_intervals_two_bands(self):
        cells = [ybox(0, 10), ybox(2, 12), ybox(30, 40)]
        bands = cluster_bands(cells, "row", overlap_frac=0.5)
        assert len(bands) == 2
        assert (bands[0].start, bands[0].end) == (0, 12)
        assert (bands[1].start, bands[1].end) == (30, 40)

    def test_empty_input(self):
        assert cluster_bands([], "row") == []

    def test_span_candidates_do_not_seed(self):
        cells = [ybox(0, 10), ybox(0, 10), ybox(12, 22), ybox(12, 22),
                 ybox(0, 22)]  # last spans both rows
        bands = cluster_bands(cells, "row")
        assert len(bands) == 2

    def test_bands_disjoint_and_indexed(self):
        cells = [ybox(0, 11), ybox(9, 20), ybox(40, 50)]
        bands = cluster_bands(cells, "row", overlap_frac=0.9)
        for a, b in zip(bands, bands[1:]):
            assert a.end <= b.start
        assert [b.index for b in bands] == list(range(len(bands)))

    def test_rejects_bad_overlap_frac(self):
        with pytest.raises(ValueError):
            cluster_bands([ybox(0, 5)], "row", overlap_frac=0.0)


class TestEstimateSeparators:
    def table(self):
        return BBox(0, 0, 100, 60)

    def test_one_band_gives_table_edges(self):
        bands = [Band("row", 10, 20, 0)]
        assert estimate_separators(bands, self.table()) == [0.0, 60.0]

    def test_midpoint_of_gap(self):
        bands = [Band("row", 10, 20, 0), Band("row", 30, 44, 1)]
        assert estimate_separators(bands, self.table()) == [0.0, 25.0, 60.0]

    def test_symmetric_under_flip(self):
        table = BBox(0, 0, 10, 90)
        bands = [Band("row", 10, 20, 0), Band("row", 40, 50, 1), Band("row", 70, 80, 2)]
        seps = estimate_separators(bands, table)
        assert len(seps) == 4
        flipped = [Band("row", 90 - b.end, 90 - b.start, i)
                   for i, b in enumerate(reversed(bands))]
        flipped_seps = estimate_separators(flipped, table)
        assert flipped_seps == sorted(90 - s for s in seps)


def ink_page(words, size=(200, 200)):
    mask = np.zeros((size[1], size[0]), dtype=bool)
    for x0, y0, x1, y1 in words:
        mask[y0:y1, x0:x1] = True
    return BinaryImage(mask)


class TestRecoverMissingCells:
    # 2x2 grid on table (0,0,100,100): separators at 0/50/100 on both axes
    ROW_SEPS = [0.0, 50.0, 100.0]
    COL_SEPS = [0.0, 50.0, 100.0]
    MODEL_3 = [BBox(0, 0, 50, 50), BBox(50, 0, 100, 50), BBox(0, 50, 50, 100)]

    def test_all_covered_nothing_recovered(self):
        page = ink_page([(60, 60, 80, 80)])
        model = self.MODEL_3 + [BBox(50, 50, 100, 100)]
        out = recover_missing_cells(page, BBox(0, 0, 100, 100),
                                    self.ROW_SEPS, self.COL_SEPS, model)
        assert out == []

    def test_word_in_uncovered_slot_recovered(self):
        word = (62, 64, 80, 74)
        page = ink_page([word])
        out = recover_missing_cells(page, BBox(0, 0, 100, 100),
                                    self.ROW_SEPS, self.COL_SEPS, self.MODEL_3)
        assert out == [BBox(*word)]

    def test_empty_slot_stays_empty(self):
        page = ink_page([])
        out = recover_missing_cells(page, BBox(0, 0, 100, 100),
                                    self.ROW_SEPS, self.COL_SEPS, self.MODEL_3)
        assert out == []

    def test_recovered_box_is_union_of_slot_text(self):
        words = [(58, 60, 70, 68), (74, 78, 88, 86)]
        page = ink_page([w for w in words])
        out = recover_missing_cells(page, BBox(0, 0, 100, 100),
                                    self.ROW_SEPS, self.COL_SEPS, self.MODEL_3)
        assert out == [BBox(58, 60, 88, 86)]


class TestAssignSpans:
    ROW_SEPS = [0.0, 30.0, 60.0, 90.0]
    COL_SEPS = [0.0, 40.0, 80.0, 120.0]

    def test_cell_inside_slot_1_1(self):
        cells, diags = assign_spans([(BBox(45, 35, 75, 55), SOURCE_MODEL)],
                                    self.ROW_SEPS, self.COL_SEPS, margin=2)
        assert len(cells) == 1 and diags == []
        c = cells[0]
        assert (c.r0, c.r1, c.c0, c.c1) == (1, 2, 1, 2)

    def test_wide_cell_spans_all_columns(self):
        cells, _ = assign_spans([(BBox(2, 32, 118, 58), SOURCE_MODEL)],
                                self.ROW_SEPS, self.COL_SEPS, margin=2)
        assert (cells[0].c0, cells[0].c1) == (0, 3)
        assert (cells[0].r0, cells[0].r1) == (1, 2)

    def test_crossing_by_margin_does_not_span(self):
        # pokes 2 px past the separator at 40: within margin, stays in slot 0
        cells, _ = assign_spans([(BBox(5, 2, 42, 28), SOURCE_MODEL)],
                                self.ROW_SEPS, self.COL_SEPS, margin=4)
        assert (cells[0].c0, cells[0].c1) == (0, 1)

    def test_conflicting_claims_resolved_by_priority(self):
        model = (BBox(2, 2, 38, 28), SOURCE_MODEL)
        recovered = (BBox(4, 4, 36, 26), SOURCE_RECOVERED)
        cells, diags = assign_spans([model, recovered],
                                    self.ROW_SEPS, self.COL_SEPS, margin=2)
        sources = {c.source: c for c in cells}
        assert len(cells) <= 2
        assert sources[SOURCE_MODEL].slots() == {(0, 0)}
        # recovered loser either dropped or shrunk; never overlapping
        assert any("claimed" in d or "shrunk" in d for d in diags)

    def test_degenerate_cell_clamped_with_diagnostic(self):
        cells, diags = assign_spans([(BBox(200, 100, 210, 110), SOURCE_MODEL)],
                                    self.ROW_SEPS, self.COL_SEPS, margin=2)
        assert len(cells) == 1
        assert any("clamped" in d for d in diags)

    @given(st.lists(st.tuples(st.integers(0, 110), st.integers(0, 80)),
                    min_size=1, max_size=12))
    @settings(max_examples=50, deadline=None)
    def test_claimed_rectangles_never_overlap(self, corners):
        entries = [(BBox(x, y, x + 9, y + 9), SOURCE_MODEL) for x, y in corners]
        cells, _ = assign_spans(entries, self.ROW_SEPS, self.COL_SEPS, margin=2)
        seen = set()
        for c in cells:
            assert not (seen & c.slots())
            seen |= c.slots()


def synth_table(doc, gen_type=None):
    for t in sorted(doc.tables, key=lambda t: (t.bbox.y0, t.bbox.x0)):
        if gen_type is None or t.gen_type == gen_type:
            return t
    return None


class TestBorderlessStructure:
    def spec(self, **kw):
        base = dict(seed=5, tables_per_page=(1, 1), rows=(3, 3), cols=(4, 4),
                    table_types=("borderless",), span_prob=0.0,
                    empty_cell_prob=0.0, jitter_px=0)
        base.update(kw)
        return SynthSpec(**base)

    def run(self, doc, detections=None):
        structures = recognize_page(doc.image, detections or doc.perfect_detections,
                                    PipelineConfig())
        assert len(structures) == 1
        return structures[0]

    def test_perfect_cells_exact_structure(self):
        doc = generate(self.spec(), 1)[0]
        g = synth_table(doc)
        s = self.run(doc)
        assert (s.n_rows, s.n_cols) == (3, 4)
        assert s.span_map() == g.span_map()
        assert all(c.source == SOURCE_MODEL for c in s.cells)

    def test_deleted_cells_come_back_recovered(self):
        doc = generate(self.spec(), 1)[0]
        page = doc.perfect_detections
        cells = [i for i in page.instances if i.cls == "cell"]
        keep = tuple(i for i in page.instances if i.cls != "cell") + tuple(cells[2:])
        thinned = type(page)(page.image_id, page.width, page.height, keep)
        s = self.run(doc, thinned)
        assert (s.n_rows, s.n_cols) == (3, 4)
        recovered = [c for c in s.cells if c.source == SOURCE_RECOVERED]
        assert len(recovered) == 2
        assert s.span_map() == synth_table(doc).span_map()

    def test_header_span_detected(self):
        doc = next(d for d in generate(self.spec(seed=11, span_prob=0.35), 40)
                   if any(c.c1 - c.c0 == 2 for t in d.tables for c in t.cells))
        g = synth_table(doc)
        s = self.run(doc)
        assert s.span_map() == g.span_map()
        assert any(c.c1 - c.c0 == 2 or c.r1 - c.r0 == 2 for c in s.cells)

    def test_no_cells_no_text_degenerate(self):
        mask = np.zeros((100, 100), dtype=bool)
        out = borderless_structure(BinaryImage(mask), BBox(10, 10, 90, 90), [])
        assert (out.n_rows, out.n_cols) == (1, 1)
        assert out.cells == ()
        assert any("degenerate" in d for d in out.diagnostics)

    def test_no_cells_but_text_recovers_single_slot(self):
        mask = np.zeros((100, 100), dtype=bool)
        mask[40:50, 30:60] = True
        out = borderless_structure(BinaryImage(mask), BBox(10, 10, 90, 90), [])
        assert (out.n_rows, out.n_cols) == (1, 1)
        assert len(out.cells) == 1
        assert out.cells[0].source == SOURCE_RECOVERED

    def test_deterministic_output(self):
        doc = generate(self.spec(seed=3, jitter_px=2), 1)[0]
        a = self.run(doc).to_dict()
        b = self.run(doc).to_dict()
        assert a == b
