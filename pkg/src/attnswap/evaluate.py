"""Replacement quality: micro-F1 of retrieved fixation indices.

For each image query the top-1 retrieved text predicts a fixation index
(the FI that text held in its pair); the query's own FI is the label.
Queries whose FI exceeds the median FI of the dataset are dropped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .cca import DEFAULT_D, DEFAULT_LAMBDA, CcaModel, auto_d, fit
from .errors import EmptyDataset, EmptyInput, InvalidArgument, LengthMismatch
from .pairing import PairRow
from .retrieval import RetrievalIndex, TextRef, nearest_text_batch
from .synth import make_rng

SCHEMES = ("stratified", "leave-one-page-out")


def median_fi(pairs: Sequence[PairRow] | Sequence[int]) -> int:
    """Lower median of the pairs' fixation indices, at least 1."""
    fis = sorted(p.fixation_index if isinstance(p, PairRow) else int(p) for p in pairs)
    if not fis:
        raise EmptyDataset("median of an empty dataset")
    return max(1, fis[(len(fis) - 1) // 2])


@dataclass(frozen=True)
class FiScore:
    fi: int
    precision: float
    recall: float
    f1: float
    support: int


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def micro_f1(true_fis: Sequence[int], pred_fis: Sequence[int], max_fi: int | None = None) -> float:
    """Micro-averaged F1 over all FI classes.

    Queries are expected to be pre-filtered to ``true <= max_fi``; when
    ``max_fi`` is given any remaining query above it is dropped here too.
    Every predicted class counts, so with one prediction per query the
    result equals exact-match accuracy.
    """
    if len(true_fis) != len(pred_fis):
        raise LengthMismatch(f"{len(true_fis)} labels vs {len(pred_fis)} predictions")
    pairs = [(t, p) for t, p in zip(true_fis, pred_fis) if max_fi is None or t <= max_fi]
    if not pairs:
        raise EmptyInput("micro-F1 of no queries")
    tp = fp = fn = 0
    for t, p in pairs:
        if t == p:
            tp += 1
        else:
            fp += 1  # counted against class p
            fn += 1  # counted against class t
    prec = tp / (tp + fp)
    rec = tp / (tp + fn)
    return _f1(prec, rec)


def per_fi_scores(true_fis: Sequence[int], pred_fis: Sequence[int], max_fi: int) -> list[FiScore]:
    out = []
    for c in range(1, max_fi + 1):
        tp = sum(1 for t, p in zip(true_fis, pred_fis) if t == c and p == c)
        n_pred = sum(1 for p in pred_fis if p == c)
        n_true = sum(1 for t in true_fis if t == c)
        prec = tp / n_pred if n_pred else 0.0
        rec = tp / n_true if n_true else 0.0
        out.append(FiScore(c, prec, rec, _f1(prec, rec), n_true))
    return out


def chance_accuracy(true_fis: Sequence[int], pred_fis: Sequence[int]) -> float:
    """Accuracy expected if predictions were independent of labels (product of marginals)."""
    n = len(true_fis)
    if n == 0:
        return 0.0
    qt, qp = Counter(true_fis), Counter(pred_fis)
    return sum(qt[c] * qp[c] for c in qt) / n ** 2


@dataclass
class EvaluationReport:
    micro_f1: float
    per_fi: list[FiScore]
    median_fi: int
    n_queries: int
    leading_rho: float
    mean_rho: float
    d: int
    chance_f1: float = 0.0
    fold_micro_f1: list[float] = field(default_factory=list)
    space: str = "text"
    scheme: str = "single"
    n_pairs: int = 0

    @property
    def chance_sigma(self) -> float:
        n = max(self.n_queries, 1)
        return float(np.sqrt(self.chance_f1 * (1 - self.chance_f1) / n))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["chance_sigma"] = self.chance_sigma
        return d


@dataclass
class QueryOutcome:
    true_fis: list[int]
    pred_fis: list[int]


def retrieve_fis(model: CcaModel, index: RetrievalIndex, I_test, true_fis: Sequence[int],
                 query_pages: Sequence[str] | None = None, max_fi: int | None = None,
                 space: str = "text", same_page_only: bool = False) -> QueryOutcome:
    """Top-1 predicted FI for every query whose true FI is within ``max_fi``."""
    I_test = np.atleast_2d(np.asarray(I_test, dtype=float))
    if I_test.shape[0] != len(true_fis):
        raise LengthMismatch("one true FI per query required")
    keep = [q for q, t in enumerate(true_fis) if max_fi is None or t <= max_fi]
    preds: dict[int, int] = {}
    if same_page_only:
        if query_pages is None:
            raise InvalidArgument("same_page_only needs query pages")
        by_page: dict[str, list[int]] = {}
        for q in keep:
            by_page.setdefault(query_pages[q], []).append(q)
        page_of = np.array([r.page_id for r in index.refs], dtype=object)
        for page, qs in by_page.items():
            sub = index.restrict(page_of == page)
            if len(sub) == 0:
                continue  # no candidate on this page: query cannot be answered
            for q, res in zip(qs, nearest_text_batch(model, sub, I_test[qs], 1, space)):
                preds[q] = res[0].ref.fixation_index
    elif keep:
        for q, res in zip(keep, nearest_text_batch(model, index, I_test[keep], 1, space)):
            preds[q] = res[0].ref.fixation_index
    answered = [q for q in keep if q in preds]
    return QueryOutcome([int(true_fis[q]) for q in answered], [preds[q] for q in answered])


def evaluate_retrieval(model: CcaModel, index: RetrievalIndex, I_test, true_fis: Sequence[int],
                       max_fi: int, query_pages: Sequence[str] | None = None, space: str = "text",
                       same_page_only: bool = False) -> EvaluationReport:
    """Score one model/index against held-out image queries."""
    out = retrieve_fis(model, index, I_test, true_fis, query_pages, max_fi, space, same_page_only)
    return EvaluationReport(
        micro_f1=micro_f1(out.true_fis, out.pred_fis),
        per_fi=per_fi_scores(out.true_fis, out.pred_fis, max_fi),
        median_fi=max_fi,
        n_queries=len(out.true_fis),
        leading_rho=model.leading_rho,
        mean_rho=model.mean_rho,
        d=model.d,
        chance_f1=chance_accuracy(out.true_fis, out.pred_fis),
        space=space,
    )


def assign_folds(pairs: Sequence[PairRow], folds: int = 5, scheme: str = "stratified",
                 seed: int = 0) -> np.ndarray:
    """Fold id per pair.

    ``stratified`` deals each page's pairs (shuffled) round-robin over the
    folds; ``leave-one-page-out`` gives every page its own fold.
    """
    if scheme not in SCHEMES:
        raise InvalidArgument(f"scheme must be one of {SCHEMES}")
    pages = sorted({p.page_id for p in pairs})
    assign = np.zeros(len(pairs), dtype=int)
    if scheme == "leave-one-page-out":
        fold_of = {pg: i for i, pg in enumerate(pages)}
        for j, p in enumerate(pairs):
            assign[j] = fold_of[p.page_id]
        return assign
    if folds < 2:
        raise InvalidArgument("need at least 2 folds")
    rng = make_rng(seed)
    members: dict[str, list[int]] = {pg: [] for pg in pages}
    for j, p in enumerate(pairs):
        members[p.page_id].append(j)
    offset = 0
    for pg in pages:
        idx = members[pg]
        for pos, j in enumerate(rng.permutation(len(idx))):
            assign[idx[j]] = (offset + pos) % folds
        offset += len(idx)
    return assign


@dataclass(frozen=True)
class Protocol:
    d: int | str = DEFAULT_D  # or "auto"
    lam: float = DEFAULT_LAMBDA
    folds: int = 5
    scheme: str = "stratified"
    space: str = "text"
    same_page_only: bool = False
    cross_map: str = "identity"
    auto_threshold: float = 0.1
    seed: int = 0


def fit_model(T, I, protocol: Protocol) -> CcaModel:
    if protocol.d == "auto":
        d_max = min(T.shape[1], I.shape[1], T.shape[0] - 1)
        full = fit(T, I, d_max, protocol.lam, protocol.cross_map)
        return truncate(full, auto_d(full.rho, protocol.auto_threshold))
    return fit(T, I, int(protocol.d), protocol.lam, protocol.cross_map)


def truncate(model: CcaModel, d: int) -> CcaModel:
    """Keep the leading d canonical pairs (identical to refitting with d)."""

    P = np.eye(d) if model.cross_map == "identity" else np.diag(model.rho[:d])
    return replace(model, P_T=model.P_T[:, :d], P_I=model.P_I[:, :d], P=P, rho=model.rho[:d])


def cross_validate(T, I, pairs: Sequence[PairRow], protocol: Protocol = Protocol()) -> EvaluationReport:
    """Cross-validated micro-F1; each fold fits on the rest and indexes its text rows."""
    T = np.asarray(T, dtype=float)
    I = np.asarray(I, dtype=float)
    if len(pairs) == 0:
        raise EmptyDataset("no pairs to evaluate")
    if not (T.shape[0] == I.shape[0] == len(pairs)):
        raise LengthMismatch("T, I and pairs must be row-aligned")
    max_fi = median_fi(pairs)
    fold_ids = assign_folds(pairs, protocol.folds, protocol.scheme, protocol.seed)
    fis = np.array([p.fixation_index for p in pairs])
    pages = [p.page_id for p in pairs]

    all_true: list[int] = []
    all_pred: list[int] = []
    fold_scores, rhos_lead, rhos_mean, ds = [], [], [], []
    for f in np.unique(fold_ids):
        test = np.nonzero(fold_ids == f)[0]
        train = np.nonzero(fold_ids != f)[0]
        if len(train) < 2 or len(test) == 0:
            continue
        model = fit_model(T[train], I[train], protocol)
        refs = [TextRef(pairs[j].text_element_id, pairs[j].page_id, pairs[j].participant_id,
                        pairs[j].fixation_index) for j in train]
        index = RetrievalIndex.build(model, T[train], refs)
        out = retrieve_fis(model, index, I[test], fis[test].tolist(), [pages[j] for j in test],
                           max_fi, protocol.space, protocol.same_page_only)
        rhos_lead.append(model.leading_rho)
        rhos_mean.append(model.mean_rho)
        ds.append(model.d)
        if not out.true_fis:
            continue
        fold_scores.append(micro_f1(out.true_fis, out.pred_fis))
        all_true += out.true_fis
        all_pred += out.pred_fis
    if not fold_scores:
        raise EmptyDataset("no fold produced any scorable query")
    return EvaluationReport(
        micro_f1=float(np.mean(fold_scores)),
        per_fi=per_fi_scores(all_true, all_pred, max_fi),
        median_fi=max_fi,
        n_queries=len(all_true),
        leading_rho=float(np.mean(rhos_lead)),
        mean_rho=float(np.mean(rhos_mean)),
        d=int(round(float(np.mean(ds)))),
        chance_f1=chance_accuracy(all_true, all_pred),
        fold_micro_f1=[float(s) for s in fold_scores],
        space=protocol.space,
        scheme=protocol.scheme,
        n_pairs=len(pairs),
    )
