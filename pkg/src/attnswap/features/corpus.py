"""Feature tables for a whole corpus, and their join with the paired dataset."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DanglingReference, FormatError
from ..ingest import Corpus, Modality
from ..matio import read_matrices, write_matrices
from ..pairing import PairRow
from .image import IMAGE_DIM, extract_image_features, intrinsic_image_features
from .manifest import FeatureManifest, default_manifest
from .text import extract_text_features


@dataclass
class FeatureTable:
    text_ids: list[str]
    T: np.ndarray
    image_ids: list[str]
    I: np.ndarray

    def __post_init__(self):
        self._t_row = {e: i for i, e in enumerate(self.text_ids)}
        self._i_row = {e: i for i, e in enumerate(self.image_ids)}

    def text_row(self, element_id: str) -> np.ndarray:
        return self.T[self._t_row[element_id]]

    def image_row(self, element_id: str) -> np.ndarray:
        return self.I[self._i_row[element_id]]

    def join(self, pairs: Sequence[PairRow]) -> tuple[np.ndarray, np.ndarray]:
        """Aligned (n x 70, n x 91) matrices for the pairs."""
        try:
            ti = [self._t_row[p.text_element_id] for p in pairs]
            ii = [self._i_row[p.image_element_id] for p in pairs]
        except KeyError as exc:
            raise DanglingReference(f"pair references element without features: {exc}") from None
        return self.T[ti].reshape(len(ti), self.T.shape[1]), self.I[ii].reshape(len(ii), self.I.shape[1])

    def save(self, path: str | Path, meta: dict | None = None) -> Path:
        """Write the matrix file and its ``.ids.json`` sidecar; returns the sidecar path."""
        path = Path(path)
        write_matrices(path, [self.T, self.I])
        sidecar = sidecar_path(path)
        doc = {"text_ids": self.text_ids, "image_ids": self.image_ids}
        if meta:
            doc["meta"] = meta
        sidecar.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        return sidecar

    @classmethod
    def load(cls, path: str | Path) -> "FeatureTable":
        path = Path(path)
        mats = read_matrices(path)
        if len(mats) != 2:
            raise FormatError(f"{path}: feature file must hold a text and an image block")
        ids = json.loads(sidecar_path(path).read_text())
        T, I = mats
        if len(ids["text_ids"]) != T.shape[0] or len(ids["image_ids"]) != I.shape[0]:
            raise FormatError(f"{path}: id sidecar does not match matrix row counts")
        return cls(list(ids["text_ids"]), T, list(ids["image_ids"]), I)


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".ids.json")


def corpus_features(corpus: Corpus, manifest: FeatureManifest | None = None,
                    element_ids: set[str] | None = None) -> FeatureTable:
    """Extract features for every element (or only ``element_ids``)."""
    manifest = manifest or default_manifest()
    texts = [e for e in corpus.elements_of(Modality.TEXT) if element_ids is None or e.element_id in element_ids]
    images = [e for e in corpus.elements_of(Modality.IMAGE) if element_ids is None or e.element_id in element_ids]

    T = np.zeros((len(texts), len(manifest)))
    for r, el in enumerate(texts):
        T[r] = extract_text_features(el, corpus.pages[el.page_id].viewport, manifest)

    page_stats: dict[str, np.ndarray] = {}
    I = np.zeros((len(images), IMAGE_DIM))
    for r, el in enumerate(images):
        page = corpus.pages[el.page_id]
        if el.page_id not in page_stats:
            page_stats[el.page_id] = intrinsic_image_features(corpus.load_raster(page.screenshot_ref))
        I[r] = extract_image_features(corpus.load_raster(el.raster_ref), None, el.bbox, page.viewport,
                                      page_intrinsic=page_stats[el.page_id])
    return FeatureTable([e.element_id for e in texts], T, [e.element_id for e in images], I)
