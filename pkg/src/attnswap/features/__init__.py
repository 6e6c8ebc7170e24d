"""Visual feature extraction: 70 text features, 91 image features."""

from .image import (IMAGE_DIM, IMAGE_FEATURE_NAMES, INTRINSIC_DIM, extract_image_features,
                    histogram8, intrinsic_image_features)
from .manifest import TEXT_DIM, FeatureManifest, ManifestEntry, default_manifest, load_manifest
from .stats import Standardizer, fit_standardizer, standardize
from .text import extract_text_features, positional_features

__all__ = [
    "IMAGE_DIM", "IMAGE_FEATURE_NAMES", "INTRINSIC_DIM", "TEXT_DIM",
    "FeatureManifest", "ManifestEntry", "Standardizer",
    "default_manifest", "extract_image_features", "extract_text_features", "fit_standardizer",
    "histogram8", "intrinsic_image_features", "load_manifest", "positional_features", "standardize",
]
