"""Positional and CSS-derived text features."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..errors import SchemaViolation, UnparsableAttribute
from ..ingest import BBox, Element, Modality, Viewport
from . import css
from .manifest import FeatureManifest, default_manifest

# longhand -> shorthand consulted when the longhand is absent
_SHORTHAND_FALLBACK = {
    "border-top-width": "border-width",
    "border-right-width": "border-width",
    "border-bottom-width": "border-width",
    "border-left-width": "border-width",
    "border-top-left-radius": "border-radius",
    "border-top-right-radius": "border-radius",
    "border-bottom-right-radius": "border-radius",
    "border-bottom-left-radius": "border-radius",
}
_BOX_SIDES = {"top": 0, "left": 1, "right": 2, "bottom": 3}


def positional_features(bbox: BBox, viewport: Viewport) -> np.ndarray:
    """(dist_top, dist_left, dist_right, dist_bottom, area) of the viewport-clipped bbox."""
    x0 = min(max(bbox.x, 0.0), viewport.width_px)
    y0 = min(max(bbox.y, 0.0), viewport.height_px)
    x1 = min(max(bbox.x + bbox.w, 0.0), viewport.width_px)
    y1 = min(max(bbox.y + bbox.h, 0.0), viewport.height_px)
    w, h = x1 - x0, y1 - y0
    return np.array([y0, x0, viewport.width_px - x1, viewport.height_px - y1, w * h], dtype=float)


def _box_value(style: Mapping[str, str], attr: str, side: str) -> float | None:
    longhand = style.get(f"{attr}-{side}")
    if longhand is not None:
        return css.parse_length(longhand)
    shorthand = style.get(attr)
    if shorthand is None:
        return None
    return css.parse_box_shorthand(shorthand)[_BOX_SIDES[side]]


def _scalar_value(style: Mapping[str, str], entry) -> float | None:
    raw = style.get(entry.source)
    if raw is None:
        fallback = _SHORTHAND_FALLBACK.get(entry.source)
        if fallback is None or fallback not in style:
            return None
        # only the first value of a multi-value shorthand is used
        parts = style[fallback].split()
        raw = parts[0] if parts else ""
    if entry.kind == "length":
        return css.parse_length(raw)
    return css.parse_number(raw, entry.source)


def extract_text_features(
    element: Element, viewport: Viewport, manifest: FeatureManifest | None = None
) -> np.ndarray:
    """Feature vector in manifest order; absent attributes take manifest defaults."""
    if element.modality is not Modality.TEXT:
        raise SchemaViolation(f"element {element.element_id!r} is not a text element")
    manifest = manifest or default_manifest()
    style = {k.strip().lower(): v for k, v in (element.style_attrs or {}).items()}
    pos = dict(zip(("dist_top", "dist_left", "dist_right", "dist_bottom", "area"),
                   positional_features(element.bbox, viewport)))
    colors: dict[str, tuple[float, ...]] = {}

    out = np.empty(len(manifest), dtype=float)
    for i, entry in enumerate(manifest.entries):
        try:
            if entry.kind == "position":
                val = pos[entry.source]
            elif entry.kind == "color":
                if entry.source not in colors and entry.source in style:
                    colors[entry.source] = css.parse_color(style[entry.source])
                rgba = colors.get(entry.source)
                val = None if rgba is None else rgba["rgba".index(entry.component)]
            elif entry.kind == "box":
                val = _box_value(style, entry.source, entry.component)
            elif entry.kind in ("length", "number"):
                val = _scalar_value(style, entry)
            elif entry.kind == "ordinal":
                val = css.parse_ordinal(style[entry.source], entry.levels) if entry.source in style else None
            elif entry.kind == "font_family":
                val = css.parse_font_family(style[entry.source], entry.levels) if entry.source in style else None
            else:  # flag
                val = css.parse_flag(style[entry.source]) if entry.source in style else None
        except UnparsableAttribute as exc:
            raise UnparsableAttribute(f"element {element.element_id!r}, {entry.source}: {exc}") from None
        out[i] = entry.default if val is None else val
    return out
