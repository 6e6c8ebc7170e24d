"""Regularized canonical correlation analysis between text and image features.

The model stores the standardization statistics of both modalities, the
canonical directions ``P_T`` (p_t x d) and ``P_I`` (p_i x d), the map ``P``
between the two d-dimensional subspaces, and the canonical correlations.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (DimensionTooLarge, FormatError, InvalidArgument, LengthMismatch, MissingFile,
                     RowCountMismatch, SingularCovariance, TooFewRows)
from .features.stats import Standardizer, fit_standardizer

DEFAULT_D = 28
DEFAULT_LAMBDA = 1e-4
EIG_FLOOR = 1e-12
CROSS_MAPS = ("identity", "rho")


@dataclass(frozen=True)
class CovarianceSet:
    Sigma_TT: np.ndarray
    Sigma_II: np.ndarray
    Sigma_TI: np.ndarray

    @property
    def Sigma_IT(self) -> np.ndarray:
        return self.Sigma_TI.T


def covariances(Z_T, Z_I, lam: float = 0.0) -> CovarianceSet:
    """Sample covariances (1/n) of centered data, with trace-scaled ridge on the diagonal blocks."""
    Z_T = np.asarray(Z_T, dtype=float)
    Z_I = np.asarray(Z_I, dtype=float)
    if Z_T.shape[0] != Z_I.shape[0]:
        raise RowCountMismatch(f"text has {Z_T.shape[0]} rows, image has {Z_I.shape[0]}")
    n = Z_T.shape[0]
    if n < 2:
        raise TooFewRows(f"need at least 2 paired rows, got {n}")
    if lam < 0:
        raise InvalidArgument("lambda must be >= 0")
    S_tt = Z_T.T @ Z_T / n
    S_ii = Z_I.T @ Z_I / n
    S_ti = Z_T.T @ Z_I / n
    S_tt = (S_tt + S_tt.T) / 2
    S_ii = (S_ii + S_ii.T) / 2
    if lam > 0:
        S_tt = S_tt + lam * np.trace(S_tt) / S_tt.shape[0] * np.eye(S_tt.shape[0])
        S_ii = S_ii + lam * np.trace(S_ii) / S_ii.shape[0] * np.eye(S_ii.shape[0])
    return CovarianceSet(S_tt, S_ii, S_ti)


def inv_sqrt(S: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Symmetric inverse square root via eigendecomposition.

    Raises SingularCovariance when the spectrum is (numerically) rank-deficient.
    """
    w, V = np.linalg.eigh(S)
    top = max(float(w[-1]), 0.0)
    if top <= 0 or w[0] <= EIG_FLOOR * top:
        raise SingularCovariance(
            f"{name} is singular (min eigenvalue {w[0]:.3g}, max {top:.3g}); use lambda > 0"
        )
    w = np.maximum(w, EIG_FLOOR)
    return (V / np.sqrt(w)) @ V.T


@dataclass(frozen=True, eq=False)
class CcaModel:
    P_T: np.ndarray
    P_I: np.ndarray
    P: np.ndarray
    rho: np.ndarray
    text_stats: Standardizer
    image_stats: Standardizer
    lam: float
    cross_map: str = "identity"
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.rho.shape[0]

    @property
    def text_dim(self) -> int:
        return self.P_T.shape[0]

    @property
    def image_dim(self) -> int:
        return self.P_I.shape[0]

    @property
    def leading_rho(self) -> float:
        return float(self.rho[0])

    @property
    def mean_rho(self) -> float:
        return float(self.rho.mean())

    def _standardized(self, x, stats: Standardizer, standardized: bool) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != stats.means.shape[0]:
            raise LengthMismatch(f"expected {stats.means.shape[0]} features, got {x.shape[-1]}")
        return x if standardized else stats.transform(x)

    def project_text(self, t, standardized: bool = False) -> np.ndarray:
        """Subspace coordinates ``P_T^T z_t``; accepts one vector or a row matrix."""
        return self._standardized(t, self.text_stats, standardized) @ self.P_T

    def project_image(self, i, standardized: bool = False) -> np.ndarray:
        return self._standardized(i, self.image_stats, standardized) @ self.P_I

    @cached_property
    def back_projection(self) -> np.ndarray:
        """The p_t x p_i matrix ``pinv(P_T^T) P P_I^T`` mapping image queries into text space."""
        return np.linalg.pinv(self.P_T.T) @ self.P @ self.P_I.T

    def summary(self) -> dict:
        return {
            "d": self.d,
            "lambda": self.lam,
            "cross_map": self.cross_map,
            "text_dim": self.text_dim,
            "image_dim": self.image_dim,
            "rho": [float(r) for r in self.rho],
            "leading_rho": self.leading_rho,
            "mean_rho": self.mean_rho,
        }

    def save(self, path: str | Path, meta: dict | None = None) -> None:
        save_model(self, path, meta)


def _canonical_sign(u: np.ndarray) -> float:
    j = int(np.argmax(np.abs(u)))
    return -1.0 if u[j] < 0 else 1.0


def fit(T, I, d: int = DEFAULT_D, lam: float = DEFAULT_LAMBDA, cross_map: str = "identity") -> CcaModel:
    """Fit CCA on raw paired rows (standardized internally).

    The canonical directions are the de-whitened leading eigenvectors of
    ``S_TT^-1/2 S_TI S_II^-1 S_IT S_TT^-1/2`` and its image-side mirror,
    obtained together from one SVD of the whitened cross-covariance so the
    two sides stay paired even when correlations are degenerate.
    """
    T = np.asarray(T, dtype=float)
    I = np.asarray(I, dtype=float)
    if T.ndim != 2 or I.ndim != 2:
        raise InvalidArgument("T and I must be 2-D")
    if T.shape[0] != I.shape[0]:
        raise RowCountMismatch(f"text has {T.shape[0]} rows, image has {I.shape[0]}")
    n, p_t = T.shape
    p_i = I.shape[1]
    if n < 2:
        raise TooFewRows(f"need at least 2 paired rows, got {n}")
    if cross_map not in CROSS_MAPS:
        raise InvalidArgument(f"cross_map must be one of {CROSS_MAPS}")
    if not 1 <= d <= min(p_t, p_i, n - 1):
        raise DimensionTooLarge(f"d={d} must lie in [1, min({p_t}, {p_i}, n-1={n - 1})]")

    t_stats = fit_standardizer(T)
    i_stats = fit_standardizer(I)
    Z_T = t_stats.transform(T)
    Z_I = i_stats.transform(I)
    cov = covariances(Z_T, Z_I, lam)
    W_T = inv_sqrt(cov.Sigma_TT, "text covariance")
    W_I = inv_sqrt(cov.Sigma_II, "image covariance")

    K = W_T @ cov.Sigma_TI @ W_I
    U, s, Vt = np.linalg.svd(K, full_matrices=False)
    U, V = U[:, :d], Vt[:d].T
    for k in range(d):
        sign = _canonical_sign(U[:, k])
        U[:, k] *= sign
        V[:, k] *= sign

    rho = np.clip(s[:d], 0.0, 1.0)
    P = np.eye(d) if cross_map == "identity" else np.diag(rho)
    return CcaModel(W_T @ U, W_I @ V, P, rho, t_stats, i_stats, float(lam), cross_map)


def canonical_correlations(model: CcaModel) -> np.ndarray:
    return model.rho.copy()


def auto_d(rho, threshold: float = 0.1) -> int:
    """Largest d whose d-th canonical correlation is at least ``threshold`` (minimum 1)."""
    rho = np.asarray(rho)
    keep = np.nonzero(rho >= threshold)[0]
    return int(keep[-1] + 1) if keep.size else 1


# -- serialization -----------------------------------------------------------
#
#   magic "CCAM" | version u32 | d u32 | lambda f64 | p_t u32 | p_i u32 | cross_map u8
#   text means, text stds (p_t each) | image means, image stds (p_i each)
#   P_T (p_t x d) | P_I (p_i x d) | P (d x d) | rho (d)      all <f8, row-major
#   meta length u32 | meta JSON (utf-8)

MODEL_MAGIC = b"CCAM"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<4sIIdIIB")


def encode_model(model: CcaModel, meta: dict | None = None) -> bytes:
    meta = dict(model.meta if meta is None else meta)
    meta.setdefault("tool_version", __version__)
    parts = [_MODEL_HEADER.pack(MODEL_MAGIC, MODEL_VERSION, model.d, model.lam, model.text_dim,
                                model.image_dim, CROSS_MAPS.index(model.cross_map))]
    for arr in (model.text_stats.means, model.text_stats.stds, model.image_stats.means,
                model.image_stats.stds, model.P_T, model.P_I, model.P, model.rho):
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes(order="C"))
    blob = json.dumps(meta, sort_keys=True).encode()
    parts.append(struct.pack("<I", len(blob)) + blob)
    return b"".join(parts)


def decode_model(buf: bytes) -> CcaModel:
    if len(buf) < _MODEL_HEADER.size:
        raise FormatError("model file too short")
    magic, version, d, lam, p_t, p_i, cm = _MODEL_HEADER.unpack_from(buf)
    if magic != MODEL_MAGIC:
        raise FormatError(f"bad model magic {magic!r}")
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported model version {version}")
    off = _MODEL_HEADER.size
    shapes = [(p_t,), (p_t,), (p_i,), (p_i,), (p_t, d), (p_i, d), (d, d), (d,)]
    arrs = []
    for shape in shapes:
        size = int(np.prod(shape)) * 8
        if off + size > len(buf):
            raise FormatError("truncated model file")
        arrs.append(np.frombuffer(buf, dtype="<f8", count=size // 8, offset=off).reshape(shape).astype(float))
        off += size
    if off + 4 > len(buf):
        raise FormatError("truncated model file")
    (mlen,) = struct.unpack_from("<I", buf, off)
    if off + 4 + mlen != len(buf):
        raise FormatError("model meta trailer has the wrong length")
    try:
        meta = json.loads(buf[off + 4:].decode()) if mlen else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"model meta trailer is not valid JSON: {exc}") from exc
    t_mean, t_std, i_mean, i_std, P_T, P_I, P, rho = arrs
    return CcaModel(P_T, P_I, P, rho, Standardizer(t_mean, t_std), Standardizer(i_mean, i_std),
                    float(lam), CROSS_MAPS[cm], meta)


def save_model(model: CcaModel, path: str | Path, meta: dict | None = None) -> None:
    """Write the binary model and a ``.json`` summary next to it."""
    path = Path(path)
    path.write_bytes(encode_model(model, meta))
    summary = model.summary()
    summary["meta"] = dict(model.meta if meta is None else meta)
    path.with_name(path.name + ".json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")


def load_model(path: str | Path) -> CcaModel:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such model file: {path}")
    return decode_model(path.read_bytes())
