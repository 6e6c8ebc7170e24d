"""Corpus loading, fixation filtering and fixation-to-element hit-testing.

A corpus directory holds three JSON files plus raster images::

    pages.json      [{page_id, viewport: {width_px, height_px}, screenshot_ref}]
    elements.json   [{element_id, page_id, modality, bbox, style_attrs | raster_ref, z_order}]
    fixations.json  [{participant_id, page_id, x, y, onset_ms, duration_ms}]

Raster paths are relative to the corpus root.
"""

from __future__ import annotations

import enum
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DanglingReference, InvalidArgument, MissingFile, SchemaViolation, UnreadableRaster

log = logging.getLogger(__name__)

DEFAULT_MIN_FIXATION_MS = 100


class Modality(str, enum.Enum):
    TEXT = "text"
    IMAGE = "image"


@dataclass(frozen=True)
class Viewport:
    width_px: int = 1680
    height_px: int = 1050

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise SchemaViolation(f"viewport must be positive, got {self.width_px}x{self.height_px}")


@dataclass(frozen=True)
class BBox:
    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h

    def contains(self, px: float, py: float) -> bool:
        # half-open: left/top edges inside, right/bottom edges outside
        return self.x <= px < self.x + self.w and self.y <= py < self.y + self.h

    def intersects(self, vp: Viewport) -> bool:
        return self.x < vp.width_px and self.y < vp.height_px and self.x + self.w > 0 and self.y + self.h > 0


@dataclass(frozen=True)
class Page:
    page_id: str
    viewport: Viewport
    screenshot_ref: str


@dataclass(frozen=True)
class Element:
    element_id: str
    page_id: str
    modality: Modality
    bbox: BBox
    style_attrs: Mapping[str, str] | None = None
    raster_ref: str | None = None
    z_order: int = 0


@dataclass(frozen=True)
class Fixation:
    participant_id: str
    page_id: str
    x: float
    y: float
    onset_ms: int
    duration_ms: int


@dataclass(frozen=True)
class AttendedEvent:
    participant_id: str
    page_id: str
    element_id: str
    onset_ms: int
    modality: Modality


@dataclass
class Corpus:
    root: Path
    pages: dict[str, Page] = field(default_factory=dict)
    elements: list[Element] = field(default_factory=list)
    fixations: list[Fixation] = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {e.element_id: e for e in self.elements}

    def element(self, element_id: str) -> Element:
        return self._by_id[element_id]

    def elements_of(self, modality: Modality) -> list[Element]:
        return [e for e in self.elements if e.modality is modality]

    def viewports(self) -> dict[str, Viewport]:
        return {pid: p.viewport for pid, p in self.pages.items()}

    def raster_path(self, ref: str) -> Path:
        return self.root / ref

    def load_raster(self, ref: str) -> np.ndarray:
        return load_raster(self.raster_path(ref))


def load_raster(path: str | Path) -> np.ndarray:
    """Decode a raster file into an ``H x W x 3`` uint8 array."""
    from PIL import Image

    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise UnreadableRaster(f"cannot decode raster {path}: {exc}") from exc


# -- parsing -----------------------------------------------------------------


def _read_json_array(path: Path) -> list:
    if not path.is_file():
        raise MissingFile(f"missing corpus file: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path.name}: invalid JSON ({exc})") from exc
    if not isinstance(data, list):
        raise SchemaViolation(f"{path.name}: top level must be an array")
    return data


def _field(rec: dict, name: str, where: str, kind=None):
    if not isinstance(rec, dict):
        raise SchemaViolation(f"{where}: record must be an object")
    if name not in rec:
        raise SchemaViolation(f"{where}.{name}: required field missing")
    val = rec[name]
    if kind is not None:
        ok = isinstance(val, kind) and not (kind in (int, float, (int, float)) and isinstance(val, bool))
        if not ok:
            raise SchemaViolation(f"{where}.{name}: expected {getattr(kind, '__name__', kind)}, got {val!r}")
    return val


def _parse_viewport(rec, where) -> Viewport:
    w = _field(rec, "width_px", where, int)
    h = _field(rec, "height_px", where, int)
    if w <= 0 or h <= 0:
        raise SchemaViolation(f"{where}: width_px and height_px must be positive")
    return Viewport(w, h)


def _parse_bbox(val, where) -> BBox:
    if isinstance(val, dict):
        vals = [val.get(k) for k in ("x", "y", "w", "h")]
    elif isinstance(val, (list, tuple)):
        vals = list(val)
    else:
        raise SchemaViolation(f"{where}: bbox must be [x, y, w, h] or an object")
    if len(vals) != 4 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
        raise SchemaViolation(f"{where}: bbox needs four numbers, got {val!r}")
    x, y, w, h = (float(v) for v in vals)
    if w <= 0 or h <= 0:
        raise SchemaViolation(f"{where}: bbox width and height must be > 0")
    return BBox(x, y, w, h)


def parse_page(rec: dict, i: int) -> Page:
    where = f"pages[{i}]"
    pid = _field(rec, "page_id", where, str)
    vp = _parse_viewport(_field(rec, "viewport", where, dict), f"{where}.viewport")
    shot = _field(rec, "screenshot_ref", where, str)
    return Page(pid, vp, shot)


def parse_element(rec: dict, i: int) -> Element:
    where = f"elements[{i}]"
    eid = _field(rec, "element_id", where, str)
    pid = _field(rec, "page_id", where, str)
    raw_mod = _field(rec, "modality", where, str)
    try:
        modality = Modality(raw_mod.lower())
    except ValueError:
        raise SchemaViolation(f"{where}.modality: expected 'text' or 'image', got {raw_mod!r}") from None
    bbox = _parse_bbox(_field(rec, "bbox", where), f"{where}.bbox")
    style = rec.get("style_attrs")
    raster = rec.get("raster_ref")
    z = rec.get("z_order", 0)
    if not isinstance(z, int) or isinstance(z, bool):
        raise SchemaViolation(f"{where}.z_order: expected integer")
    if modality is Modality.TEXT:
        if raster is not None:
            raise SchemaViolation(f"{where}: text element must not carry raster_ref")
        if style is None:
            style = {}
        if not isinstance(style, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in style.items()):
            raise SchemaViolation(f"{where}.style_attrs: must map strings to strings")
    else:
        if style is not None:
            raise SchemaViolation(f"{where}: image element must not carry style_attrs")
        if not isinstance(raster, str):
            raise SchemaViolation(f"{where}.raster_ref: image element requires a raster path")
    return Element(eid, pid, modality, bbox, style, raster, z)


def parse_fixation(rec: dict, i: int) -> Fixation:
    where = f"fixations[{i}]"
    part = _field(rec, "participant_id", where, str)
    pid = _field(rec, "page_id", where, str)
    x = _field(rec, "x", where, (int, float))
    y = _field(rec, "y", where, (int, float))
    onset = _field(rec, "onset_ms", where, int)
    dur = _field(rec, "duration_ms", where, int)
    if dur < 0:
        raise SchemaViolation(f"{where}.duration_ms: must be >= 0")
    return Fixation(part, pid, float(x), float(y), onset, dur)


def load_corpus(root: str | Path, *, check_rasters: bool = True) -> Corpus:
    """Load and validate a corpus directory; every reference is resolved."""
    root = Path(root)
    if not root.is_dir():
        raise MissingFile(f"corpus root is not a directory: {root}")
    pages_raw = _read_json_array(root / "pages.json")
    elements_raw = _read_json_array(root / "elements.json")
    fixations_raw = _read_json_array(root / "fixations.json")

    pages: dict[str, Page] = {}
    for i, rec in enumerate(pages_raw):
        page = parse_page(rec, i)
        if page.page_id in pages:
            raise SchemaViolation(f"pages[{i}].page_id: duplicate id {page.page_id!r}")
        pages[page.page_id] = page

    elements = [parse_element(rec, i) for i, rec in enumerate(elements_raw)]
    seen: set[str] = set()
    for i, el in enumerate(elements):
        if el.element_id in seen:
            raise SchemaViolation(f"elements[{i}].element_id: duplicate id {el.element_id!r}")
        seen.add(el.element_id)
        if el.page_id not in pages:
            raise DanglingReference(f"elements[{i}]: unknown page_id {el.page_id!r}")
        if not el.bbox.intersects(pages[el.page_id].viewport):
            raise SchemaViolation(f"elements[{i}].bbox: lies entirely outside the page viewport")

    fixations = [parse_fixation(rec, i) for i, rec in enumerate(fixations_raw)]
    last_onset: dict[tuple[str, str], int] = {}
    for i, fx in enumerate(fixations):
        if fx.page_id not in pages:
            raise DanglingReference(f"fixations[{i}]: unknown page_id {fx.page_id!r}")
        key = (fx.participant_id, fx.page_id)
        if key in last_onset and fx.onset_ms <= last_onset[key]:
            raise SchemaViolation(
                f"fixations[{i}].onset_ms: not strictly increasing within session {key}"
            )
        last_onset[key] = fx.onset_ms

    if check_rasters:
        for pid, page in pages.items():
            if not (root / page.screenshot_ref).is_file():
                raise DanglingReference(f"page {pid!r}: screenshot {page.screenshot_ref!r} not found")
        for el in elements:
            if el.raster_ref is not None and not (root / el.raster_ref).is_file():
                raise DanglingReference(f"element {el.element_id!r}: raster {el.raster_ref!r} not found")

    return Corpus(root, pages, elements, fixations)


# -- fixation processing -----------------------------------------------------


def filter_fixations(samples: Iterable[Fixation], min_duration_ms: int = DEFAULT_MIN_FIXATION_MS) -> list[Fixation]:
    """Keep fixations lasting at least ``min_duration_ms``, preserving order."""
    if min_duration_ms < 0:
        raise InvalidArgument("min_duration_ms must be >= 0")
    return [f for f in samples if f.duration_ms >= min_duration_ms]


def hit_test(x: float, y: float, candidates: Sequence[Element]) -> Element | None:
    """Return the element under ``(x, y)``.

    Overlaps resolve to the smallest area, then the highest z_order, then the
    lexicographically smallest element_id.
    """
    hits = [e for e in candidates if e.bbox.contains(x, y)]
    if not hits:
        return None
    return min(hits, key=lambda e: (e.bbox.area, -e.z_order, e.element_id))


def map_fixations_to_elements(
    fixations: Sequence[Fixation],
    elements: Sequence[Element],
    viewport: Viewport | Mapping[str, Viewport] | None = None,
) -> list[AttendedEvent]:
    """Hit-test each fixation against the elements of its page.

    Fixations outside the viewport or outside every element are dropped.
    ``viewport`` may be a single viewport or a page_id -> viewport mapping.
    """
    by_page: dict[str, list[Element]] = defaultdict(list)
    for e in elements:
        by_page[e.page_id].append(e)

    events = []
    for fx in fixations:
        vp = viewport.get(fx.page_id) if isinstance(viewport, Mapping) else viewport
        if vp is not None and not (0 <= fx.x < vp.width_px and 0 <= fx.y < vp.height_px):
            continue
        hit = hit_test(fx.x, fx.y, by_page.get(fx.page_id, ()))
        if hit is not None:
            events.append(AttendedEvent(fx.participant_id, fx.page_id, hit.element_id, fx.onset_ms, hit.modality))
    dropped = len(fixations) - len(events)
    if dropped:
        log.debug("hit-testing dropped %d of %d fixations", dropped, len(fixations))
    return events


def attended_events(corpus: Corpus, min_duration_ms: int = DEFAULT_MIN_FIXATION_MS) -> list[AttendedEvent]:
    kept = filter_fixations(corpus.fixations, min_duration_ms)
    return map_fixations_to_elements(kept, corpus.elements, corpus.viewports())
