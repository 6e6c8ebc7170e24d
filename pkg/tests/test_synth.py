import json

import numpy as np
import pytest

from attnswap.errors import InvalidSpec
from attnswap.ingest import Modality, load_corpus
from attnswap.pairing import IndexedAttention, build_pairs
from attnswap.synth import (GAP_X, SynthSpec, brute_force_cca_2d, gen_attention_corpus, gen_correlated_pairs,
                            load_ground_truth, make_rng)


def test_rng_is_reproducible():
    assert np.array_equal(make_rng(3).standard_normal(5), make_rng(3).standard_normal(5))
    assert not np.array_equal(make_rng(3).standard_normal(5), make_rng(4).standard_normal(5))


def test_pairs_deterministic():
    spec = SynthSpec(n_pairs=300, seed=7)
    a, b = gen_correlated_pairs(spec), gen_correlated_pairs(spec)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    T, I, _ = a
    assert T.shape == (300, 70) and I.shape == (300, 91)


def test_latent_columns_hit_targets():
    T, I, rhos = gen_correlated_pairs(SynthSpec(n_pairs=20_000, seed=1))
    for k, target in enumerate(rhos):
        assert abs(np.corrcoef(T[:, k], I[:, k])[0, 1] - target) <= 0.03
    # noise columns are uncorrelated with everything on the other side
    assert abs(np.corrcoef(T[:, 10], I[:, 0])[0, 1]) < 0.03


@pytest.mark.parametrize("kwargs", [
    {"latent_dim": 2},
    {"target_rhos": (0.5, 0.8, 0.9)},
    {"target_rhos": (1.2, 0.8, 0.5)},
    {"target_rhos": (0.9, 0.8, 0.0)},
    {"n_pairs": 1},
    {"latent_dim": 4, "target_rhos": (0.9, 0.8, 0.7, 0.6), "text_dim": 3},
])
def test_invalid_pair_specs(kwargs):
    with pytest.raises(InvalidSpec):
        gen_correlated_pairs(SynthSpec(**kwargs))


@pytest.mark.parametrize("kwargs", [
    {"texts_per_page": (5, 2)},
    {"images_per_page": (0, 99)},
    {"n_pages": 0},
    {"noise_sigma": -1},
    {"raster_px": 0},
])
def test_invalid_corpus_specs(kwargs, tmp_path):
    with pytest.raises(InvalidSpec):
        gen_attention_corpus(SynthSpec(**kwargs), tmp_path)


def test_spec_dict_roundtrip():
    spec = SynthSpec(n_pages=3, texts_per_page=(1, 2))
    assert SynthSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    with pytest.raises(InvalidSpec):
        SynthSpec.from_dict({"n_pagez": 3})


def test_corpus_is_deterministic(tmp_path):
    spec = SynthSpec(n_pages=3, n_participants=2, seed=4)
    gen_attention_corpus(spec, tmp_path / "a")
    gen_attention_corpus(spec, tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files
    for rel in files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_corpus_contents(synth_corpus):
    c = synth_corpus.corpus
    assert len(c.pages) == 22
    assert c.elements_of(Modality.TEXT) and c.elements_of(Modality.IMAGE)
    assert load_ground_truth(c.root)["pairs"] == synth_corpus.ground_truth
    assert load_corpus(c.root).pages.keys() == c.pages.keys()


def test_corpus_has_distractors(synth_corpus):
    fixes = synth_corpus.corpus.fixations
    assert any(f.duration_ms < 100 for f in fixes)
    assert any(f.x == GAP_X for f in fixes)
    # refixations: some element is looked at more than once in a session
    seen, refix = set(), False
    els = synth_corpus.corpus.elements
    for f in fixes:
        hit = next((e.element_id for e in els if e.page_id == f.page_id and e.bbox.contains(f.x, f.y)), None)
        if hit and f.duration_ms >= 100:
            key = (f.participant_id, f.page_id, hit)
            refix |= key in seen
            seen.add(key)
    assert refix


def test_pairing_example_one_page():
    mk = lambda eid, mod, k: IndexedAttention("p", "w", eid, mod, k)  # noqa: E731
    indexed = [mk("a", Modality.TEXT, 1), mk("b", Modality.TEXT, 2), mk("c", Modality.TEXT, 3),
               mk("x", Modality.IMAGE, 1), mk("y", Modality.IMAGE, 2)]
    got = [(r.text_element_id, r.image_element_id, r.fixation_index) for r in build_pairs(indexed)]
    assert got == [("a", "x", 1), ("b", "y", 2)]


# -- brute-force 2-D oracle ------------------------------------------------------


def test_brute_force_aligned_axes():
    r = np.random.default_rng(0)
    z = r.standard_normal(2000)
    T = np.column_stack([z, r.standard_normal(2000)])
    I = np.column_stack([r.standard_normal(2000), z])
    rho, a_t, a_i = brute_force_cca_2d(T, I)
    assert rho == pytest.approx(1.0)
    assert (a_t, a_i) == (0.0, 90.0)


def test_brute_force_negative_correlation_is_found():
    r = np.random.default_rng(1)
    z = r.standard_normal(500)
    T = np.column_stack([z, r.standard_normal(500)])
    I = np.column_stack([-z, r.standard_normal(500)])
    assert brute_force_cca_2d(T, I)[0] == pytest.approx(1.0)


def test_brute_force_rejects_wrong_shape():
    with pytest.raises(ValueError):
        brute_force_cca_2d(np.zeros((10, 3)), np.zeros((10, 2)))
