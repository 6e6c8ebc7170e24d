"""Synthetic data with known ground truth, and brute-force oracles.

All randomness comes from numpy's Philox counter-based generator seeded with
``SynthSpec.seed``, so a spec fully determines its output.

Correlated pairs use a Gaussian latent-plus-noise construction: for each
latent column k, ``t_k = z_k + s_k e`` and ``i_k = z_k + s_k e'`` with
``s_k^2 = (1 - rho_k) / rho_k``, which gives population correlation
``1 / (1 + s_k^2) = rho_k``.

Attention corpora place text and image elements on pages with a hidden
rank 1..K per modality.  Element appearance (position, typography, raster
color) encodes its rank plus ``noise_sigma`` noise; viewing order in each
session sorts ``fi_signal_strength * rank + N(0, 1)``, so a high strength
makes fixation order follow the rank and zero strength makes it random.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import InvalidSpec, TooFewRows
from .ingest import Corpus, load_corpus

VIEWPORT = (1680, 1050)
SLOT_PX = 120
TOP_PX = 40
TEXT_BOX = (60.0, 600.0, 90.0)  # x, w, h
IMAGE_BOX = (900.0, 320.0, 90.0)
GAP_X = 780.0  # a column no element covers


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class SynthSpec:
    n_pairs: int = 5000
    latent_dim: int = 3
    target_rhos: tuple[float, ...] = (0.95, 0.80, 0.50)
    noise_sigma: float = 0.1
    fi_signal_strength: float = 10.0
    seed: int = 0
    text_dim: int = 70
    image_dim: int = 91
    n_pages: int = 40
    n_participants: int = 5
    texts_per_page: tuple[int, int] = (3, 8)
    images_per_page: tuple[int, int] = (2, 6)
    raster_px: int = 16
    distractor_rate: float = 0.15

    def __post_init__(self):
        self.target_rhos = tuple(float(r) for r in self.target_rhos)
        self.texts_per_page = tuple(self.texts_per_page)
        self.images_per_page = tuple(self.images_per_page)

    def validate_pairs(self) -> "SynthSpec":
        rhos = self.target_rhos
        if len(rhos) != self.latent_dim:
            raise InvalidSpec(f"latent_dim={self.latent_dim} but {len(rhos)} target rhos")
        if self.latent_dim > min(self.text_dim, self.image_dim):
            raise InvalidSpec("latent_dim exceeds a feature dimension")
        if any(not 0 < r <= 1 for r in rhos):
            raise InvalidSpec("target rhos must lie in (0, 1]")
        if any(a < b for a, b in zip(rhos, rhos[1:])):
            raise InvalidSpec("target rhos must be descending")
        if self.n_pairs < 2:
            raise InvalidSpec("n_pairs must be >= 2")
        return self

    def validate_corpus(self) -> "SynthSpec":
        for name in ("texts_per_page", "images_per_page"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi or TOP_PX + SLOT_PX * hi > VIEWPORT[1]:
                raise InvalidSpec(f"{name} must satisfy 0 <= lo <= hi <= 8, got {(lo, hi)}")
        if self.n_pages < 1 or self.n_participants < 1:
            raise InvalidSpec("need at least one page and one participant")
        if self.noise_sigma < 0 or self.fi_signal_strength < 0:
            raise InvalidSpec("noise_sigma and fi_signal_strength must be >= 0")
        if self.raster_px < 1:
            raise InvalidSpec("raster_px must be >= 1")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidSpec(f"unknown synth spec fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


# -- correlated pairs ----------------------------------------------------------


def gen_correlated_pairs(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(T, I, true_rhos)`` with the first latent_dim columns correlated at the targets."""
    spec.validate_pairs()
    rng = make_rng(spec.seed)
    n, k = spec.n_pairs, spec.latent_dim
    rhos = np.asarray(spec.target_rhos)
    sig = np.sqrt((1 - rhos) / rhos)
    z = rng.standard_normal((n, k))
    T = rng.standard_normal((n, spec.text_dim))
    I = rng.standard_normal((n, spec.image_dim))
    T[:, :k] = z + sig * rng.standard_normal((n, k))
    I[:, :k] = z + sig * rng.standard_normal((n, k))
    return T, I, rhos


# -- attention corpora ---------------------------------------------------------


@dataclass
class SynthCorpus:
    corpus: Corpus
    ground_truth: list[dict]
    ranks: dict[str, int] = field(default_factory=dict)

    def truth_set(self) -> set[tuple]:
        return {(g["text_element_id"], g["image_element_id"], g["participant_id"], g["page_id"],
                 g["fixation_index"]) for g in self.ground_truth}


def _clip255(v: float) -> float:
    return float(min(max(v, 0.0), 255.0))


def _text_style(u: np.ndarray, align: str) -> dict[str, str]:
    fs = 12 + 2 * u[0]
    return {
        "font-size": f"{fs:.4f}px",
        "font-weight": f"{300 + 50 * u[1]:.4f}",
        "line-height": f"{1.2 * (12 + 2 * u[2]):.4f}px",
        "color": f"rgba({_clip255(30 * u[3]):.4f}, 40, {_clip255(255 - 25 * u[4]):.4f}, 1)",
        "margin": f"{max(4 * u[5], 0):.4f}px 8px {max(2 * u[6], 0):.4f}px 8px",
        "letter-spacing": f"{0.2 * u[7]:.4f}px",
        "text-align": align,
    }


def _raster(rng, u: np.ndarray, size: int) -> np.ndarray:
    base = np.array([_clip255(30 * u[0]), _clip255(200 - 20 * u[1]), _clip255(60 + 15 * u[2])])
    noise = rng.integers(-12, 13, size=(size, size, 3))
    return np.clip(np.rint(base + noise), 0, 255).astype(np.uint8)


def _save_ppm(path: Path, arr: np.ndarray) -> None:
    from PIL import Image

    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr, "RGB").save(path, format="PPM")


def _slot_y(u_pos: float, h: float) -> float:
    y = TOP_PX + SLOT_PX * (u_pos - 1)
    return float(min(max(y, 0.0), VIEWPORT[1] - h))


def _interleave(rng, a: list, b: list) -> list:
    out, i, j = [], 0, 0
    while i < len(a) or j < len(b):
        if j >= len(b) or (i < len(a) and rng.random() < (len(a) - i) / (len(a) - i + len(b) - j)):
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    return out


def gen_attention_corpus(spec: SynthSpec, root: str | Path) -> SynthCorpus:
    """Write a synthetic corpus (plus ground_truth.json) under ``root`` and load it."""
    spec.validate_corpus()
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = make_rng(spec.seed)
    sig = spec.noise_sigma

    pages, elements, fixations, truth = [], [], [], []
    ranks: dict[str, int] = {}
    page_elems: dict[str, list[dict]] = {}

    for g in range(spec.n_pages):
        pid = f"page{g:03d}"
        shot = f"screens/{pid}.ppm"
        shade = rng.integers(190, 256, size=3)
        screen = np.clip(shade + rng.integers(-10, 11, size=(30, 48, 3)), 0, 255).astype(np.uint8)
        _save_ppm(root / shot, screen)
        pages.append({"page_id": pid, "viewport": {"width_px": VIEWPORT[0], "height_px": VIEWPORT[1]},
                      "screenshot_ref": shot})

        recs = []
        for modality, (lo, hi), box in (("text", spec.texts_per_page, TEXT_BOX),
                                         ("image", spec.images_per_page, IMAGE_BOX)):
            count = int(rng.integers(lo, hi + 1))
            for j, r in enumerate(rng.permutation(count) + 1):
                eid = f"{pid}-{modality[0]}{j}"
                u = r + sig * rng.standard_normal(8)
                x, w, h = box
                rec = {"element_id": eid, "page_id": pid, "modality": modality,
                       "bbox": [x, _slot_y(u[0] if sig else r, h), w, h], "z_order": 0}
                if modality == "text":
                    align = ("left", "center", "right")[int(rng.integers(0, 3))]
                    rec["style_attrs"] = _text_style(u, align)
                else:
                    ref = f"rasters/{eid}.ppm"
                    _save_ppm(root / ref, _raster(rng, u[1:], spec.raster_px))
                    rec["raster_ref"] = ref
                ranks[eid] = int(r)
                recs.append(rec)
        elements.extend(recs)
        page_elems[pid] = recs

    for q in range(spec.n_participants):
        part = f"P{q:02d}"
        for pid, recs in page_elems.items():
            seqs = {}
            for modality in ("text", "image"):
                mrecs = [e for e in recs if e["modality"] == modality]
                keys = [spec.fi_signal_strength * ranks[e["element_id"]] + rng.standard_normal() for e in mrecs]
                seqs[modality] = [mrecs[i] for i in np.argsort(keys, kind="stable")]
            for k in range(min(len(seqs["text"]), len(seqs["image"]))):
                truth.append({"participant_id": part, "page_id": pid, "fixation_index": k + 1,
                              "text_element_id": seqs["text"][k]["element_id"],
                              "image_element_id": seqs["image"][k]["element_id"]})
            order = _interleave(rng, seqs["text"], seqs["image"])
            fixations.extend(_session_fixations(rng, part, pid, order, recs, spec.distractor_rate))

    (root / "pages.json").write_text(json.dumps(pages, indent=1) + "\n")
    (root / "elements.json").write_text(json.dumps(elements, indent=1) + "\n")
    (root / "fixations.json").write_text(json.dumps(fixations, indent=1) + "\n")
    (root / "ground_truth.json").write_text(json.dumps(
        {"spec": spec.to_dict(), "pairs": truth, "ranks": ranks}, indent=1, sort_keys=True) + "\n")
    return SynthCorpus(load_corpus(root), truth, ranks)


def _center(rng, rec: dict) -> tuple[float, float]:
    x, y, w, h = rec["bbox"]
    return (round(x + w / 2 + float(rng.uniform(-w / 4, w / 4)), 2),
            round(y + h / 2 + float(rng.uniform(-h / 4, h / 4)), 2))


def _session_fixations(rng, part: str, pid: str, order: list[dict], recs: list[dict],
                       distractor_rate: float) -> list[dict]:
    """Fixations visiting ``order`` with filtered-out, missed and repeated distractors mixed in."""
    out = []
    t = int(rng.integers(0, 200))

    def emit(x, y, dur):
        nonlocal t
        out.append({"participant_id": part, "page_id": pid, "x": x, "y": y,
                    "onset_ms": t, "duration_ms": int(dur)})
        t += int(dur) + int(rng.integers(20, 60))

    visited: list[dict] = []
    for rec in order:
        if rng.random() < distractor_rate:
            # too short to count
            emit(*_center(rng, recs[int(rng.integers(0, len(recs)))]), rng.integers(30, 100))
        if rng.random() < distractor_rate:
            # long fixation on empty space
            emit(GAP_X, float(rng.uniform(0, VIEWPORT[1] - 1)), rng.integers(100, 400))
        emit(*_center(rng, rec), rng.integers(100, 450))
        visited.append(rec)
        if rng.random() < distractor_rate:
            # refixation of an already indexed element
            emit(*_center(rng, visited[int(rng.integers(0, len(visited)))]), rng.integers(100, 300))
    return out


def load_ground_truth(root: str | Path) -> dict:
    return json.loads((Path(root) / "ground_truth.json").read_text())


# -- oracles -------------------------------------------------------------------


def brute_force_cca_2d(T, I, step_deg: float = 0.5) -> tuple[float, float, float]:
    """Grid search for the most correlated pair of unit directions in two 2-D spaces.

    Returns ``(rho_hat, angle_t, angle_i)`` in degrees; ties go to the smaller angles.
    """
    T = np.asarray(T, dtype=float)
    I = np.asarray(I, dtype=float)
    if T.shape[1] != 2 or I.shape[1] != 2:
        raise ValueError("brute_force_cca_2d needs exactly two columns per side")
    if T.shape[0] < 3 or T.shape[0] != I.shape[0]:
        raise TooFewRows("need at least 3 aligned rows")
    angles = np.arange(0.0, 180.0, step_deg)
    rad = np.deg2rad(angles)
    dirs = np.stack([np.cos(rad), np.sin(rad)])  # 2 x m
    A = (T - T.mean(0)) @ dirs
    B = (I - I.mean(0)) @ dirs
    A /= np.linalg.norm(A, axis=0)
    B /= np.linalg.norm(B, axis=0)
    # directions are only searched over a half-turn, so a negative correlation counts as its flip
    C = np.abs(A.T @ B)
    flat = int(np.argmax(C))
    a, b = np.unravel_index(flat, C.shape)
    return float(C[a, b]), float(angles[a]), float(angles[b])
