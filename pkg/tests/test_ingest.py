import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from attnswap.errors import DanglingReference, MissingFile, SchemaViolation
from attnswap.ingest import (BBox, Element, Fixation, Modality, Viewport, filter_fixations, load_corpus,
                             map_fixations_to_elements)
from attnswap.synth import SynthSpec, gen_attention_corpus

from conftest import gray, page, write_corpus


def fx(x=0.0, y=0.0, dur=200, onset=0, part="p", pid="w1"):
    return Fixation(part, pid, x, y, onset, dur)


def text_el(eid, bbox, pid="w1", z=0):
    return Element(eid, pid, Modality.TEXT, BBox(*bbox), {}, None, z)


# -- load_corpus ---------------------------------------------------------------


def test_empty_elements_loads(tmp_path):
    root = write_corpus(tmp_path, [page()], [], [], {"shot.ppm": gray()})
    corpus = load_corpus(root)
    assert len(corpus.elements) == 0
    assert len(corpus.pages) == 1


def test_fixation_with_unknown_page_is_dangling(tmp_path):
    fixes = [{"participant_id": "p", "page_id": "nope", "x": 1, "y": 1, "onset_ms": 0, "duration_ms": 200}]
    root = write_corpus(tmp_path, [page()], [], fixes, {"shot.ppm": gray()})
    with pytest.raises(DanglingReference, match="fixations\\[0\\]"):
        load_corpus(root)


def test_element_with_unknown_page_is_dangling(tmp_path):
    els = [{"element_id": "t", "page_id": "zz", "modality": "text", "bbox": [0, 0, 10, 10]}]
    root = write_corpus(tmp_path, [page()], els, [], {"shot.ppm": gray()})
    with pytest.raises(DanglingReference):
        load_corpus(root)


def test_missing_raster_is_dangling(tmp_path):
    els = [{"element_id": "i", "page_id": "w1", "modality": "image", "bbox": [0, 0, 10, 10],
            "raster_ref": "gone.ppm"}]
    root = write_corpus(tmp_path, [page()], els, [], {"shot.ppm": gray()})
    with pytest.raises(DanglingReference, match="gone.ppm"):
        load_corpus(root)


def test_missing_file(tmp_path):
    write_corpus(tmp_path, [page()], [], [], {"shot.ppm": gray()})
    (tmp_path / "fixations.json").unlink()
    with pytest.raises(MissingFile):
        load_corpus(tmp_path)


@pytest.mark.parametrize("element, msg", [
    ({"element_id": "t", "page_id": "w1", "modality": "text", "bbox": [0, 0, 0, 5]}, "bbox"),
    ({"element_id": "t", "page_id": "w1", "modality": "video", "bbox": [0, 0, 5, 5]}, "modality"),
    ({"element_id": "t", "page_id": "w1", "modality": "text", "bbox": [0, 0, 5, 5],
      "raster_ref": "shot.ppm"}, "raster_ref"),
    ({"element_id": "t", "page_id": "w1", "modality": "image", "bbox": [0, 0, 5, 5]}, "raster_ref"),
    ({"element_id": "t", "page_id": "w1", "modality": "text", "bbox": [5000, 0, 5, 5]}, "outside"),
    ({"page_id": "w1", "modality": "text", "bbox": [0, 0, 5, 5]}, "element_id"),
])
def test_schema_violations_name_the_field(tmp_path, element, msg):
    root = write_corpus(tmp_path, [page()], [element], [], {"shot.ppm": gray()})
    with pytest.raises(SchemaViolation, match=msg):
        load_corpus(root)


def test_non_increasing_onsets_rejected(tmp_path):
    fixes = [{"participant_id": "p", "page_id": "w1", "x": 1, "y": 1, "onset_ms": t, "duration_ms": 200}
             for t in (100, 100)]
    root = write_corpus(tmp_path, [page()], [], fixes, {"shot.ppm": gray()})
    with pytest.raises(SchemaViolation, match="onset_ms"):
        load_corpus(root)


def test_negative_duration_rejected(tmp_path):
    fixes = [{"participant_id": "p", "page_id": "w1", "x": 1, "y": 1, "onset_ms": 0, "duration_ms": -1}]
    root = write_corpus(tmp_path, [page()], [], fixes, {"shot.ppm": gray()})
    with pytest.raises(SchemaViolation, match="duration_ms"):
        load_corpus(root)


def test_invalid_json(tmp_path):
    write_corpus(tmp_path, [page()], [], [], {"shot.ppm": gray()})
    (tmp_path / "pages.json").write_text("{not json")
    with pytest.raises(SchemaViolation):
        load_corpus(tmp_path)


def test_twenty_two_pages(tmp_path):
    sc = gen_attention_corpus(SynthSpec(n_pages=22, n_participants=1, seed=2), tmp_path)
    assert len(load_corpus(tmp_path).pages) == 22 == len(sc.corpus.pages)


def test_viewport_default():
    assert Viewport() == Viewport(1680, 1050)
    with pytest.raises(SchemaViolation):
        Viewport(0, 10)


# -- filter_fixations ----------------------------------------------------------


def test_filter_threshold():
    out = filter_fixations([fx(dur=99), fx(dur=100, onset=1), fx(dur=250, onset=2)], 100)
    assert [f.duration_ms for f in out] == [100, 250]


def test_filter_zero_threshold_is_identity():
    xs = [fx(dur=d, onset=i) for i, d in enumerate([0, 5, 300])]
    assert filter_fixations(xs, 0) == xs


def test_filter_empty():
    assert filter_fixations([], 100) == []


durations = st.lists(st.integers(0, 1000), max_size=30)


@given(durations, st.integers(0, 1000))
def test_filter_idempotent(durs, thr):
    xs = [fx(dur=d, onset=i) for i, d in enumerate(durs)]
    once = filter_fixations(xs, thr)
    assert filter_fixations(once, thr) == once
    assert all(f.duration_ms >= thr for f in once)


# -- hit testing ---------------------------------------------------------------


def test_single_hit():
    ev = map_fixations_to_elements([fx(10, 10)], [text_el("a", (0, 0, 100, 100))], Viewport())
    assert [e.element_id for e in ev] == ["a"]


def test_nested_picks_smaller():
    els = [text_el("outer", (0, 0, 100, 100)), text_el("inner", (5, 5, 20, 20))]
    ev = map_fixations_to_elements([fx(10, 10)], els, Viewport())
    assert ev[0].element_id == "inner"


def test_equal_area_tiebreak_z_then_id():
    els = [text_el("b", (0, 0, 50, 50), z=1), text_el("a", (0, 0, 50, 50), z=0), text_el("c", (0, 0, 50, 50), z=1)]
    assert map_fixations_to_elements([fx(1, 1)], els)[0].element_id == "b"
    els = [text_el("b", (0, 0, 50, 50)), text_el("a", (0, 0, 50, 50))]
    assert map_fixations_to_elements([fx(1, 1)], els)[0].element_id == "a"


def test_miss_is_dropped():
    assert map_fixations_to_elements([fx(500, 500)], [text_el("a", (0, 0, 100, 100))]) == []


def test_half_open_boundaries():
    left, right = text_el("left", (0, 0, 100, 100)), text_el("right", (100, 0, 100, 100))
    # x=100 lies on left's right edge (outside) and right's left edge (inside)
    ev = map_fixations_to_elements([fx(100, 50)], [left, right])
    assert [e.element_id for e in ev] == ["right"]
    assert map_fixations_to_elements([fx(0, 0)], [left])[0].element_id == "left"
    assert map_fixations_to_elements([fx(50, 100)], [left]) == []


def test_only_same_page_elements_hit():
    els = [text_el("a", (0, 0, 100, 100), pid="w2")]
    assert map_fixations_to_elements([fx(10, 10, pid="w1")], els) == []


def test_outside_viewport_dropped():
    els = [text_el("a", (0, 0, 3000, 100))]
    assert map_fixations_to_elements([fx(2000, 10)], els, Viewport()) == []
    assert len(map_fixations_to_elements([fx(2000, 10)], els, None)) == 1


boxes = st.tuples(st.integers(0, 200), st.integers(0, 200), st.integers(1, 200), st.integers(1, 200))
points = st.tuples(st.integers(0, 400), st.integers(0, 400))


@given(st.lists(boxes, max_size=8), st.lists(points, max_size=20), st.lists(st.integers(-2, 2), max_size=8))
def test_hit_testing_properties(bxs, pts, zs):
    els = [text_el(f"e{i}", b, z=zs[i] if i < len(zs) else 0) for i, b in enumerate(bxs)]
    fixes = [fx(x, y, onset=i) for i, (x, y) in enumerate(pts)]
    ev = map_fixations_to_elements(fixes, els, Viewport())
    assert len(ev) <= len(fixes)
    assert ev == map_fixations_to_elements(fixes, list(reversed(els)), Viewport())
    by_id = {e.element_id: e for e in els}
    for e in ev:
        f = next(f for f in fixes if f.onset_ms == e.onset_ms)
        hit = by_id[e.element_id]
        assert hit.bbox.contains(f.x, f.y)
        # brute force: no containing element beats the chosen one under the tie-break order
        rivals = [c for c in els if c.bbox.contains(f.x, f.y)]
        best = sorted(rivals, key=lambda c: (c.bbox.area, -c.z_order, c.element_id))[0]
        assert best.element_id == hit.element_id


def test_corpus_json_roundtrip(clean_corpus):
    data = json.loads((clean_corpus.corpus.root / "elements.json").read_text())
    assert len(data) == len(clean_corpus.corpus.elements)
