from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatch, TooFewRows


@dataclass(frozen=True)
class Standardizer:
    """Column means and population stds; constant columns keep std 0 and scale 1."""

    means: np.ndarray
    stds: np.ndarray

    @property
    def scale(self) -> np.ndarray:
        return np.where(self.stds > 0, self.stds, 1.0)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.means.shape[0]:
            raise LengthMismatch(f"expected {self.means.shape[0]} features, got {X.shape[-1]}")
        return (X - self.means) / self.scale


def fit_standardizer(X) -> Standardizer:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewRows(f"standardization needs at least 2 rows, got shape {X.shape}")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    # numerically-constant columns: treat as exactly constant
    stds = np.where(stds <= 1e-12 * np.maximum(1.0, np.abs(means)), 0.0, stds)
    return Standardizer(means, stds)


def standardize(X):
    """Return ``(Z, means, stds)`` with zero-mean, unit-population-std columns."""
    st = fit_standardizer(X)
    return st.transform(X), st.means, st.stds
