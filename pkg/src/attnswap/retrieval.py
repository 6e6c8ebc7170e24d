"""Back-projection nearest-neighbor retrieval of text for an image query.

An image query is standardized, projected into the image subspace, mapped
across with ``P`` and lifted into text-feature space with the pseudo-inverse
of ``P_T^T``.  The answer is its Euclidean nearest neighbor among the
standardized candidate text rows (``space="text"``), or, optionally, the
nearest candidate measured inside the text subspace (``space="subspace"``).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .cca import CcaModel
from .errors import EmptyIndex, FormatError, InvalidArgument, LengthMismatch
from .matio import read_matrices, write_matrices

SPACES = ("text", "subspace")


@dataclass(frozen=True)
class TextRef:
    element_id: str
    page_id: str = ""
    participant_id: str = ""
    fixation_index: int = 0

    @property
    def key(self) -> str:
        # tie-break order for equal distances
        return f"{self.element_id}|{self.page_id}|{self.participant_id}|{self.fixation_index:06d}"


@dataclass(frozen=True)
class Hit:
    ref: TextRef
    distance: float


RankedResult = list[Hit]


@dataclass(eq=False)
class RetrievalIndex:
    """Standardized candidate text rows plus their identities."""

    Z_T: np.ndarray
    refs: list[TextRef]
    _coords: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.Z_T = np.asarray(self.Z_T, dtype=float)
        if self.Z_T.ndim != 2 or self.Z_T.shape[0] != len(self.refs):
            raise LengthMismatch(f"{self.Z_T.shape[0]} rows but {len(self.refs)} refs")
        keys = [r.key for r in self.refs]
        self._tie_rank = np.empty(len(keys), dtype=np.int64)
        self._tie_rank[sorted(range(len(keys)), key=keys.__getitem__)] = np.arange(len(keys))

    def __len__(self):
        return len(self.refs)

    @classmethod
    def build(cls, model: CcaModel, T_raw, refs: Sequence[TextRef]) -> "RetrievalIndex":
        return cls(model.text_stats.transform(T_raw), list(refs))

    def subspace_coords(self, model: CcaModel) -> np.ndarray:
        key = id(model)
        if key not in self._coords:
            self._coords[key] = (model, self.Z_T @ model.P_T)
        return self._coords[key][1]

    def restrict(self, mask) -> "RetrievalIndex":
        mask = np.asarray(mask, dtype=bool)
        return RetrievalIndex(self.Z_T[mask], [r for r, m in zip(self.refs, mask) if m])

    def save(self, path: str | Path, meta: dict | None = None) -> None:
        path = Path(path)
        write_matrices(path, [self.Z_T])
        doc = {"refs": [asdict(r) for r in self.refs]}
        if meta:
            doc["meta"] = meta
        path.with_name(path.name + ".refs.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RetrievalIndex":
        path = Path(path)
        mats = read_matrices(path)
        if len(mats) != 1:
            raise FormatError(f"{path}: index file must hold exactly one matrix block")
        doc = json.loads(path.with_name(path.name + ".refs.json").read_text())
        return cls(mats[0], [TextRef(**r) for r in doc["refs"]])


def back_project_to_text(model: CcaModel, i_q, standardized: bool = False) -> np.ndarray:
    """Lift an image query (one vector or a row matrix) into standardized text space."""
    i_q = np.asarray(i_q, dtype=float)
    if i_q.shape[-1] != model.image_dim:
        raise LengthMismatch(f"expected {model.image_dim} image features, got {i_q.shape[-1]}")
    z = i_q if standardized else model.image_stats.transform(i_q)
    return z @ model.back_projection.T


def _distances(model: CcaModel, index: RetrievalIndex, queries: np.ndarray, space: str,
               standardized: bool) -> np.ndarray:
    if space == "text":
        targets = back_project_to_text(model, queries, standardized)
        cands = index.Z_T
    elif space == "subspace":
        targets = model.project_image(queries, standardized) @ model.P.T
        cands = index.subspace_coords(model)
    else:
        raise InvalidArgument(f"space must be one of {SPACES}, got {space!r}")
    # cdist sums squared differences directly, so exact matches come out at 0
    return cdist(targets, cands)


def _rank(dist: np.ndarray, index: RetrievalIndex, k: int) -> RankedResult:
    order = np.lexsort((index._tie_rank, dist))[:k]
    return [Hit(index.refs[j], float(dist[j])) for j in order]


def nearest_text_batch(model: CcaModel, index: RetrievalIndex, queries, k: int = 1,
                       space: str = "text", standardized: bool = False,
                       chunk: int = 256) -> list[RankedResult]:
    if len(index) == 0:
        raise EmptyIndex("retrieval index has no candidates")
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    out: list[RankedResult] = []
    for start in range(0, queries.shape[0], chunk):
        D = _distances(model, index, queries[start:start + chunk], space, standardized)
        out.extend(_rank(row, index, k) for row in D)
    return out


def nearest_text(model: CcaModel, index: RetrievalIndex, i_q, k: int = 1, space: str = "text",
                 standardized: bool = False) -> RankedResult:
    """Top-k candidate texts for one image query, nearest first."""
    i_q = np.asarray(i_q, dtype=float)
    if i_q.ndim != 1:
        raise LengthMismatch("nearest_text takes a single query vector")
    return nearest_text_batch(model, index, i_q[None, :], k, space, standardized)[0]


def ranked_to_json(result: RankedResult) -> list[dict]:
    return [{**asdict(h.ref), "distance": h.distance} for h in result]
