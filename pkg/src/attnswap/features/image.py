"""Color/intensity image features and their page-contrast counterparts."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyInput
from ..ingest import BBox, Viewport
from .text import positional_features

INTRINSIC_DIM = 43
IMAGE_DIM = 5 + 2 * INTRINSIC_DIM
REC601 = np.array([0.299, 0.587, 0.114])

INTRINSIC_NAMES = (
    [f"hist_{c}_{b}" for c in ("r", "g", "b", "gray") for b in range(8)]
    + ["brightness", "luminance", "mean_hue", "mean_saturation", "mean_value"]
    + ["mean_r", "mean_g", "mean_b", "var_r", "var_g", "var_b"]
)
IMAGE_FEATURE_NAMES = (
    ["dist_top", "dist_left", "dist_right", "dist_bottom", "area"]
    + INTRINSIC_NAMES
    + [f"contrast_{n}" for n in INTRINSIC_NAMES]
)


def histogram8(channel) -> np.ndarray:
    """Fraction of values in each of the bins [0,31], [32,63], ..., [224,255]."""
    vals = np.asarray(channel).ravel()
    if vals.size == 0:
        raise EmptyInput("histogram of an empty channel")
    counts = np.bincount(vals.astype(np.int64) // 32, minlength=8)
    return counts / vals.size


def _pixels(raster) -> np.ndarray:
    px = np.asarray(raster)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ValueError(f"expected an H x W x 3 raster, got shape {px.shape}")
    if px.shape[0] * px.shape[1] == 0:
        raise EmptyInput("empty raster")
    return px.reshape(-1, 3).astype(float)


def hsv_planes(px: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pixel hue (degrees), saturation (0-1) and value (0-255) of an N x 3 array."""
    r, g, b = px[:, 0], px[:, 1], px[:, 2]
    cmax = px.max(axis=1)
    cmin = px.min(axis=1)
    delta = cmax - cmin
    safe = np.where(delta > 0, delta, 1.0)
    hue = np.where(
        cmax == r, ((g - b) / safe) % 6.0,
        np.where(cmax == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
    ) * 60.0
    hue = np.where(delta > 0, hue, 0.0)
    sat = np.where(cmax > 0, delta / np.where(cmax > 0, cmax, 1.0), 0.0)
    return hue, sat, cmax


def circular_mean_deg(angles: np.ndarray) -> float:
    rad = np.deg2rad(angles)
    s, c = np.sin(rad).mean(), np.cos(rad).mean()
    if np.hypot(s, c) < 1e-12:
        return 0.0
    deg = float(np.rad2deg(np.arctan2(s, c)) % 360.0)
    return 0.0 if deg >= 360.0 else deg


def intrinsic_image_features(raster) -> np.ndarray:
    px = _pixels(raster)
    lum = px @ REC601
    gray = np.clip(np.rint(lum), 0, 255)
    hists = [histogram8(px[:, c]) for c in range(3)] + [histogram8(gray)]
    hue, sat, val = hsv_planes(px)
    photometric = [px.mean(axis=1).mean(), lum.mean(), circular_mean_deg(hue), sat.mean(), val.mean()]
    means = px.mean(axis=0)
    variances = px.var(axis=0)  # population (ddof=0)
    return np.concatenate(hists + [photometric, means, variances])


def extract_image_features(element_raster, page_raster, bbox: BBox, viewport: Viewport,
                           page_intrinsic: np.ndarray | None = None) -> np.ndarray:
    """positional(5) ++ intrinsic(element)(43) ++ (intrinsic(element) - intrinsic(page))(43).

    ``page_intrinsic`` may be passed to reuse a page's precomputed statistics.
    """
    own = intrinsic_image_features(element_raster)
    page = intrinsic_image_features(page_raster) if page_intrinsic is None else page_intrinsic
    return np.concatenate([positional_features(bbox, viewport), own, own - page])
