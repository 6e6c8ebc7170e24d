import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ortho_group

from attnswap.cca import CcaModel, fit
from attnswap.errors import EmptyDataset, EmptyInput, LengthMismatch
from attnswap.evaluate import (Protocol, assign_folds, chance_accuracy, cross_validate, evaluate_retrieval,
                               median_fi, micro_f1, per_fi_scores, retrieve_fis, truncate)
from attnswap.features.stats import Standardizer
from attnswap.pairing import PairRow
from attnswap.retrieval import RetrievalIndex, TextRef


def rows(fis, pages=None):
    pages = pages or ["w"] * len(fis)
    return [PairRow(f"t{j}", f"i{j}", "p", pg, fi) for j, (fi, pg) in enumerate(zip(fis, pages))]


@pytest.mark.parametrize("fis, want", [([1, 2, 3], 2), ([1, 1, 2, 23], 1), ([5], 5), ([2, 4], 2)])
def test_median_fi(fis, want):
    assert median_fi(fis) == want
    assert median_fi(rows(fis)) == want


def test_median_of_nothing():
    with pytest.raises(EmptyDataset):
        median_fi([])


@pytest.mark.parametrize("true, pred, want", [
    ([1, 2, 1, 2], [1, 2, 1, 2], 1.0),
    ([1, 2, 1, 2], [2, 1, 2, 1], 0.0),
    ([1, 2, 1, 2], [1, 2, 1, 1], 0.75),
    ([1, 2, 3], [1, 2, 3], 1.0),
    ([1, 2], [2, 1], 0.0),
    ([1, 2, 2, 3], [1, 2, 3, 3], 0.75),
])
def test_micro_f1_examples(true, pred, want):
    assert micro_f1(true, pred) == pytest.approx(want)


def test_micro_f1_drops_queries_above_max():
    assert micro_f1([1, 2, 9], [1, 2, 1], max_fi=2) == 1.0


def test_micro_f1_errors():
    with pytest.raises(LengthMismatch):
        micro_f1([1], [1, 2])
    with pytest.raises(EmptyInput):
        micro_f1([5], [5], max_fi=2)


labels = st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6)), min_size=1, max_size=60)


@given(labels)
def test_micro_f1_is_accuracy(pairs):
    true, pred = zip(*pairs)
    acc = sum(t == p for t, p in pairs) / len(pairs)
    assert micro_f1(true, pred) == pytest.approx(acc)
    # and it agrees with pooling per-class counts by hand
    classes = set(true) | set(pred)
    tp = sum(sum(t == p == c for t, p in pairs) for c in classes)
    fp = sum(sum(p == c and t != c for t, p in pairs) for c in classes)
    fn = sum(sum(t == c and p != c for t, p in pairs) for c in classes)
    prec, rec = tp / (tp + fp), tp / (tp + fn)
    pooled = 2 * prec * rec / (prec + rec) if tp else 0.0
    assert micro_f1(true, pred) == pytest.approx(pooled)


@given(labels, st.randoms())
def test_micro_f1_order_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    assert micro_f1(*zip(*pairs)) == pytest.approx(micro_f1(*zip(*shuffled)))


def test_per_fi_scores():
    scores = per_fi_scores([1, 1, 2], [1, 2, 2], 2)
    assert [s.support for s in scores] == [2, 1]
    assert scores[0].precision == 1 and scores[0].recall == 0.5
    assert scores[1].precision == 0.5 and scores[1].recall == 1


def test_chance_accuracy():
    assert chance_accuracy([1, 1, 2, 2], [1, 2, 1, 2]) == 0.5
    assert chance_accuracy([1, 1], [2, 2]) == 0
    assert chance_accuracy([], []) == 0


# -- retrieval-driven evaluation ------------------------------------------------


def _perfect_setup(n=60, m=4):
    r = np.random.default_rng(0)
    Z = r.standard_normal((n, 4))
    model = fit(Z, Z, d=4, lam=0)
    fis = [1 + j % m for j in range(n)]
    index = RetrievalIndex.build(model, Z, [TextRef(f"t{j}", "w", "p", fi) for j, fi in enumerate(fis)])
    return model, index, Z, fis


def test_perfect_correlation_scores_one():
    model, index, Z, fis = _perfect_setup()
    rep = evaluate_retrieval(model, index, Z, fis, max_fi=4)
    assert rep.micro_f1 == 1.0
    assert rep.n_queries == len(fis)
    assert rep.leading_rho == pytest.approx(1)


def test_queries_grow_with_max_fi():
    model, index, Z, fis = _perfect_setup()
    counts = [len(retrieve_fis(model, index, Z, fis, max_fi=k).true_fis) for k in range(1, 5)]
    assert counts == sorted(counts) and counts[-1] == len(fis)


def test_query_order_does_not_matter():
    model, index, Z, fis = _perfect_setup()
    noisy = Z + np.random.default_rng(1).standard_normal(Z.shape)
    perm = np.random.default_rng(2).permutation(len(fis))
    a = evaluate_retrieval(model, index, noisy, fis, max_fi=3)
    b = evaluate_retrieval(model, index, noisy[perm], [fis[j] for j in perm], max_fi=3)
    assert a.micro_f1 == pytest.approx(b.micro_f1)


def test_same_page_only_restricts_candidates():
    model, index, Z, fis = _perfect_setup()
    pages = ["w"] * len(fis)
    out = retrieve_fis(model, index, Z, fis, pages, same_page_only=True)
    assert out.true_fis == out.pred_fis
    out = retrieve_fis(model, index, Z, fis, ["elsewhere"] * len(fis), same_page_only=True)
    assert out.true_fis == []


def test_random_orthonormal_model_is_at_chance():
    r = np.random.default_rng(3)
    p, d, n, m = 8, 4, 3000, 4
    P_T = ortho_group.rvs(p, random_state=4)[:, :d]
    P_I = ortho_group.rvs(p, random_state=5)[:, :d]
    ident = Standardizer(np.zeros(p), np.ones(p))
    model = CcaModel(P_T, P_I, np.eye(d), np.full(d, 0.5), ident, ident, 0.0)
    texts = r.standard_normal((n, p))
    index = RetrievalIndex(texts, [TextRef(f"t{j}", "w", "p", 1 + j % m) for j in range(n)])
    queries = r.standard_normal((n, p))
    true = r.integers(1, m + 1, n).tolist()
    rep = evaluate_retrieval(model, index, queries, true, max_fi=m)
    sigma = np.sqrt((1 / m) * (1 - 1 / m) / n)
    assert abs(rep.micro_f1 - 1 / m) <= 3 * sigma


# -- folds -----------------------------------------------------------------------


def test_stratified_folds_cover_every_page():
    prs = rows([1] * 50, [f"w{j % 5}" for j in range(50)])
    folds = assign_folds(prs, 5, "stratified", seed=0)
    assert sorted(set(folds)) == [0, 1, 2, 3, 4]
    for f in range(5):
        assert {prs[j].page_id for j in np.nonzero(folds == f)[0]} == {f"w{k}" for k in range(5)}
    counts = np.bincount(folds)
    assert counts.max() - counts.min() <= 1
    assert np.array_equal(folds, assign_folds(prs, 5, "stratified", seed=0))


def test_leave_one_page_out():
    prs = rows([1, 2, 1, 2], ["b", "a", "b", "c"])
    assert assign_folds(prs, scheme="leave-one-page-out").tolist() == [1, 0, 1, 2]


def test_fold_errors():
    with pytest.raises(ValueError):
        assign_folds(rows([1]), scheme="kfold")
    with pytest.raises(ValueError):
        assign_folds(rows([1]), folds=1)


def test_truncate_matches_refit():
    r = np.random.default_rng(6)
    T, I = r.standard_normal((80, 6)), r.standard_normal((80, 5))
    full, small = fit(T, I, d=5), fit(T, I, d=2)
    cut = truncate(full, 2)
    np.testing.assert_allclose(cut.P_T, small.P_T)
    np.testing.assert_allclose(cut.rho, small.rho)


def test_cross_validate_on_synthetic_corpus(synth_corpus):
    from attnswap.features.corpus import corpus_features
    from attnswap.ingest import attended_events
    from attnswap.pairing import assign_fixation_indices, build_pairs

    prs = build_pairs(assign_fixation_indices(attended_events(synth_corpus.corpus)))
    T, I = corpus_features(synth_corpus.corpus).join(prs)
    rep = cross_validate(T, I, prs, Protocol())
    assert rep.micro_f1 >= 0.8
    assert len(rep.fold_micro_f1) == 5
    assert rep.n_pairs == len(prs)
    auto = cross_validate(T, I, prs, Protocol(d="auto"))
    assert 1 <= auto.d <= 28


def test_cross_validate_errors():
    with pytest.raises(EmptyDataset):
        cross_validate(np.zeros((0, 2)), np.zeros((0, 2)), [])
    with pytest.raises(LengthMismatch):
        cross_validate(np.zeros((3, 2)), np.zeros((3, 2)), rows([1, 1]))
