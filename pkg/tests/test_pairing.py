import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from attnswap.errors import UnsortedInput
from attnswap.ingest import AttendedEvent, Modality, attended_events
from attnswap.pairing import (Dedup, IndexedAttention, PairRow, assign_fixation_indices, build_pairs,
                              load_pairs, save_pairs)

T, I = Modality.TEXT, Modality.IMAGE


def ev(eid, onset, mod, part="p", page="w"):
    return AttendedEvent(part, page, eid, onset, mod)


def fi_map(indexed):
    return {(x.element_id, x.modality): x.fixation_index for x in indexed}


def test_per_modality_indices():
    out = assign_fixation_indices([ev("A", 0, T), ev("X", 1, I), ev("B", 2, T)])
    assert fi_map(out) == {("A", T): 1, ("X", I): 1, ("B", T): 2}


def test_empty():
    assert assign_fixation_indices([]) == []
    assert build_pairs([]) == []


def test_first_fixation_dedup():
    out = assign_fixation_indices([ev("A", 0, T), ev("A", 1, T), ev("B", 2, T)])
    assert [(x.element_id, x.fixation_index) for x in out] == [("A", 1), ("B", 2)]


def test_every_visit_mode():
    evs = [ev("A", 0, T), ev("A", 1, T), ev("B", 2, T), ev("A", 3, T)]
    out = assign_fixation_indices(evs, Dedup.EVERY_VISIT)
    assert [(x.element_id, x.fixation_index) for x in out] == [("A", 1), ("B", 2), ("A", 3)]


def test_unsorted_rejected():
    with pytest.raises(UnsortedInput):
        assign_fixation_indices([ev("A", 5, T), ev("B", 2, T)])


def test_sessions_are_independent():
    evs = [ev("A", 0, T, part="p1"), ev("B", 0, T, part="p2"), ev("C", 1, T, part="p1")]
    assert fi_map(assign_fixation_indices(evs)) == {("A", T): 1, ("B", T): 1, ("C", T): 2}


def ia(eid, mod, k, part="p", page="w"):
    return IndexedAttention(part, page, eid, mod, k)


def test_pair_intersection():
    rows = build_pairs([ia("a", T, 1), ia("b", T, 2), ia("x", I, 1)])
    assert rows == [PairRow("a", "x", "p", "w", 1)]


def test_no_images_no_pairs():
    assert build_pairs([ia("a", T, 1), ia("b", T, 2)]) == []


def test_pairs_json_roundtrip(tmp_path):
    rows = [PairRow("a", "x", "p", "w", 1), PairRow("b", "y", "p", "w", 2)]
    save_pairs(rows, tmp_path / "pairs.json")
    assert load_pairs(tmp_path / "pairs.json") == rows


sessions = st.lists(
    st.tuples(st.lists(st.integers(0, 9), max_size=12), st.lists(st.integers(0, 9), max_size=12)),
    min_size=1, max_size=6,
)


def _events(spec, seed):
    rnd = random.Random(seed)
    evs = []
    for s, (texts, images) in enumerate(spec):
        stream = [(f"s{s}t{t}", T) for t in texts] + [(f"s{s}i{i}", I) for i in images]
        rnd.shuffle(stream)
        evs += [ev(eid, k, mod, part=f"p{s % 2}", page=f"w{s}") for k, (eid, mod) in enumerate(stream)]
    return evs


@given(sessions, st.integers(0, 10_000))
def test_pairing_invariants(spec, seed):
    evs = _events(spec, seed)
    indexed = assign_fixation_indices(evs)
    rows = build_pairs(indexed)
    # indices are 1..k without gaps per (session, modality)
    streams = {}
    for x in indexed:
        streams.setdefault((x.participant_id, x.page_id, x.modality), []).append(x.fixation_index)
    for fis in streams.values():
        assert fis == list(range(1, len(fis) + 1))
    # per-session pair count equals the FI-set intersection size
    for key in {(x.participant_id, x.page_id) for x in indexed}:
        t = set(streams.get((*key, T), []))
        i = set(streams.get((*key, I), []))
        n = sum(1 for r in rows if r.session == key)
        assert n == len(t & i) <= min(len(t), len(i))
    # pairs share session and index with their members
    fis = {(x.participant_id, x.page_id, x.element_id): x.fixation_index for x in indexed}
    for r in rows:
        assert fis[(r.participant_id, r.page_id, r.text_element_id)] == r.fixation_index
        assert fis[(r.participant_id, r.page_id, r.image_element_id)] == r.fixation_index
    # session order does not matter
    shuffled = list(indexed)
    random.Random(seed).shuffle(shuffled)
    assert sorted(build_pairs(shuffled), key=repr) == sorted(rows, key=repr)


def test_zero_noise_corpus_recovers_ground_truth(clean_corpus):
    rows = build_pairs(assign_fixation_indices(attended_events(clean_corpus.corpus)))
    got = {(r.text_element_id, r.image_element_id, r.participant_id, r.page_id, r.fixation_index) for r in rows}
    assert len(rows) == len(got)
    assert got == clean_corpus.truth_set()
