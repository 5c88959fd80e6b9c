"""Feature aggregation into a co-occurrence matrix.

Pipeline: rectify and beta-center the d x N feature columns, stack the
spatial codes underneath, then average the outer products:

    M = (1/N) * PhiBar @ PhiBar^T,   PhiBar = [Phi_centered; C].

beta in [0, 1] interpolates between raw rectified features (beta = 0,
all M entries nonnegative) and fully mean-centered ones (beta = 1), where
negative entries mark features that fire only in each other's absence.
The mean is taken after rectification, and spatial codes are never
centered. Trace normalization M / (tr(M) + lam) maps entries into a range
where the probability-flavored normalizers downstream are well defined;
lam also guards the all-zero batch.

The product in cooc_matrix is one BLAS gemm: bit-identical across calls
at a fixed thread count (the reduction order inside the gemm is fixed);
set SOPOOL_THREADS to pin it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError, ValidationError
from .linalg import sym

__all__ = [
    "FeatureBatch",
    "AugmentedBatch",
    "CoocMatrix",
    "rectify_center",
    "center_columns",
    "augment",
    "cooc_matrix",
    "trace_normalize",
]


@dataclass(frozen=True)
class FeatureBatch:
    """d x N column-stacked features, optionally tagged with a (W, H) grid."""

    Phi: np.ndarray
    grid: tuple[int, int] | None = None

    def __post_init__(self):
        Phi = np.asarray(self.Phi, dtype=np.float64)
        object.__setattr__(self, "Phi", Phi)
        if Phi.ndim != 2:
            raise DimensionError(f"features must be a d x N matrix, got shape {Phi.shape}")
        if Phi.shape[1] < 1:
            raise ValidationError("feature batch is empty (N = 0)")
        if not np.all(np.isfinite(Phi)):
            raise NumericError("feature batch has NaN or Inf entries")
        if self.grid is not None:
            W, H = self.grid
            if W * H <= 0 or Phi.shape[1] % (W * H) != 0:
                raise DimensionError(
                    f"N = {Phi.shape[1]} is not a multiple of the grid size {W}x{H}"
                )

    @property
    def d(self) -> int:
        return self.Phi.shape[0]

    @property
    def N(self) -> int:
        return self.Phi.shape[1]


@dataclass(frozen=True)
class AugmentedBatch:
    """Stacked [Phi; C] with the code block kept separately addressable."""

    PhiBar: np.ndarray
    C: np.ndarray

    @property
    def d(self) -> int:
        return self.PhiBar.shape[0] - self.C.shape[0]

    @property
    def Zp(self) -> int:
        return self.C.shape[0]

    @property
    def N(self) -> int:
        return self.PhiBar.shape[1]

    @property
    def Phi(self) -> np.ndarray:
        return self.PhiBar[: self.d, :]


@dataclass(frozen=True)
class CoocMatrix:
    M: np.ndarray
    traceval: float

    @property
    def dim(self) -> int:
        return self.M.shape[0]


def center_columns(Phi: np.ndarray, beta: float) -> np.ndarray:
    """Subtract beta times the column mean from every column."""
    if not 0.0 <= beta <= 1.0:
        raise ValidationError(f"beta must lie in [0, 1], got {beta}")
    if beta == 0.0:
        return np.array(Phi, dtype=np.float64, copy=True)
    mu = np.mean(Phi, axis=1, keepdims=True)
    return Phi - beta * mu


def rectify_center(batch: FeatureBatch, beta: float) -> FeatureBatch:
    """ReLU, then subtract beta times the post-rectification mean."""
    rect = np.maximum(batch.Phi, 0.0)
    return FeatureBatch(Phi=center_columns(rect, beta), grid=batch.grid)


def augment(batch: FeatureBatch, codes: np.ndarray) -> AugmentedBatch:
    """Stack spatial codes under the features: columns become [phi_n; c_n]."""
    codes = np.asarray(codes, dtype=np.float64)
    if codes.ndim != 2 or codes.shape[1] != batch.N:
        raise DimensionError(
            f"codes must be Z' x N with N = {batch.N}, got shape {codes.shape}"
        )
    return AugmentedBatch(PhiBar=np.vstack([batch.Phi, codes]), C=codes)


def cooc_matrix(aug: AugmentedBatch) -> CoocMatrix:
    """M = (1/N) * PhiBar @ PhiBar^T; exactly symmetric, PSD up to roundoff."""
    N = aug.N
    if N < 1:
        raise ValidationError("cannot pool an empty batch (N = 0)")
    M = sym(aug.PhiBar @ aug.PhiBar.T / N)
    return CoocMatrix(M=M, traceval=float(np.trace(M)))


def trace_normalize(M, lam: float = 1e-6) -> np.ndarray:
    """M / (trace(M) + lam); lam > 0 keeps the zero matrix mapping to zero."""
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if isinstance(M, CoocMatrix):
        return M.M / (M.traceval + lam)
    M = np.asarray(M, dtype=np.float64)
    return M / (np.trace(M) + lam)
