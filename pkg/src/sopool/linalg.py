"""Dense symmetric-matrix kernel.

Symmetric matrices are plain float64 ndarrays; ``sym`` is the canonical
constructor and its output is bitwise symmetric (0.5*(a_ij + a_ji) is
commutative in IEEE addition). Spectral functions go through a single
eigendecomposition with a deterministic eigenvector convention so that
repeated calls are reproducible:

  * eigenvalues sorted descending,
  * each eigenvector's largest-magnitude component made positive.

For a spectral function psi, mat_fun(S, psi) = U diag(psi(lambda)) U^T.
Degenerate eigenvalues need no special handling here: any orthonormal
basis of the eigenspace yields the same product. Derivatives through the
eigendecomposition live elsewhere (see spectral module).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError, NumericError, ValidationError

__all__ = ["EigenPair", "sym", "sym_eig", "mat_fun", "mat_int_pow", "is_symmetric"]


@dataclass(frozen=True)
class EigenPair:
    """Eigendecomposition with values descending and orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def _as_square(X, name: str = "matrix") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {X.shape}")
    return X


def is_symmetric(X: np.ndarray, tol: float = 1e-12) -> bool:
    """Entry-wise |x_ij - x_ji| <= tol * max(1, |x_ij|)."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        return False
    bound = tol * np.maximum(1.0, np.abs(X))
    return bool(np.all(np.abs(X - X.T) <= bound))


def sym(X) -> np.ndarray:
    """Symmetrize: 0.5 * (X + X^T)."""
    X = _as_square(X)
    return 0.5 * (X + X.T)


def sym_eig(S) -> EigenPair:
    """Eigendecomposition of a symmetric matrix, deterministic convention."""
    S = _as_square(S)
    if not np.all(np.isfinite(S)):
        raise NumericError("matrix has NaN or Inf entries")
    values, vectors = np.linalg.eigh(S)
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    # sign convention: largest-magnitude component of each column positive
    lead = np.argmax(np.abs(vectors), axis=0)
    flip = vectors[lead, np.arange(vectors.shape[1])] < 0
    vectors = np.where(flip[None, :], -vectors, vectors)
    return EigenPair(values=values, vectors=vectors)


def mat_fun(S, psi: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to the spectrum: U diag(psi(lambda)) U^T."""
    pair = sym_eig(S)
    with np.errstate(invalid="ignore", divide="ignore"):
        fvals = np.asarray(psi(pair.values), dtype=np.float64)
    if fvals.shape != pair.values.shape:
        raise DimensionError(
            f"psi must map the eigenvalue vector to a same-length vector, "
            f"got {fvals.shape} for {pair.values.shape}"
        )
    if not np.all(np.isfinite(fvals)):
        bad = pair.values[~np.isfinite(fvals)][0]
        raise DomainError(f"psi undefined at eigenvalue {bad!r}")
    return sym((pair.vectors * fvals) @ pair.vectors.T)


def mat_int_pow(S, n: int) -> np.ndarray:
    """Integer matrix power by repeated multiplication; n = 0 gives identity."""
    S = _as_square(S)
    if not isinstance(n, (int, np.integer)):
        raise ValidationError(f"exponent must be an integer, got {n!r}")
    if n < 0:
        raise ValidationError(f"exponent must be >= 0, got {n}")
    out = np.eye(S.shape[0])
    for _ in range(int(n)):
        out = out @ S
    return out
