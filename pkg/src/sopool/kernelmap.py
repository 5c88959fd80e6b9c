"""Gaussian RBF feature maps over a fixed pivot grid, plus spatial encoding.

A pivot grid is Z equally spaced centers on [-0.2, 1.2]. The feature map
of a scalar x has entries exp(-(x - zeta_z)^2 / sigma^2); a product of two
such maps summed over pivots approximates a Gaussian kernel in (x - y) up
to a constant, which downstream weighting absorbs. The approximation error
falls as the pivot spacing shrinks relative to sigma, until a floor set by
the finite pivot range [-0.2, 1.2]: near the interval ends part of the
Gaussian mass lies beyond the last pivot, a bias independent of Z. Denser
pivots therefore stop helping once the spacing is well under sigma.

Spatial encoding maps integer pixel coordinates (x, y) on a W x H grid to
alpha * [phi(x/(W-1)); phi(y/(H-1))], a 2Z-vector appended to each feature
column so that co-occurrence pooling can see where responses fired.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "PivotGrid",
    "SpatialEncoding",
    "make_pivots",
    "feature_map",
    "encode_spatial",
    "encode_grid",
]

PIVOT_LO = -0.2
PIVOT_HI = 1.2
MAX_PIVOTS = 64


@dataclass(frozen=True)
class PivotGrid:
    pivots: np.ndarray
    sigma: float

    @property
    def Z(self) -> int:
        return self.pivots.shape[0]


@dataclass(frozen=True)
class SpatialEncoding:
    """Encoded coordinates for one feature location; entries lie in [0, alpha]."""

    alpha: float
    coords: np.ndarray


def make_pivots(Z: int, sigma: float | None = None) -> PivotGrid:
    """Z equally spaced pivots on [-0.2, 1.2]; default sigma is one spacing."""
    if not isinstance(Z, (int, np.integer)) or Z < 2:
        raise ConfigError(f"pivot count must be an integer >= 2, got {Z!r}")
    if Z > MAX_PIVOTS:
        raise ConfigError(f"pivot count must be <= {MAX_PIVOTS}, got {Z}")
    step = (PIVOT_HI - PIVOT_LO) / (Z - 1)
    if sigma is None:
        sigma = step
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {sigma!r}")
    pivots = PIVOT_LO + step * np.arange(Z, dtype=np.float64)
    return PivotGrid(pivots=pivots, sigma=sigma)


def feature_map(x, grid: PivotGrid) -> np.ndarray:
    """Gaussian responses of x against every pivot.

    Scalar x gives a Z-vector; an array of shape s gives shape s + (Z,).
    """
    if grid.sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {grid.sigma!r}")
    x = np.asarray(x, dtype=np.float64)
    d = x[..., None] - grid.pivots
    return np.exp(-(d * d) / (grid.sigma**2))


def encode_spatial(x: int, y: int, W: int, H: int, alpha: float, grid: PivotGrid) -> np.ndarray:
    """Encode pixel (x, y) on a W x H map as alpha * [phi(x'); phi(y')].

    x' = x/(W-1), y' = y/(H-1); W, H >= 2 so the normalization is defined.
    """
    if W < 2 or H < 2:
        raise ConfigError(f"grid must be at least 2x2 to normalize coordinates, got W={W}, H={H}")
    if not (0 <= x < W and 0 <= y < H):
        raise ConfigError(f"pixel ({x}, {y}) outside {W}x{H} grid")
    if alpha < 0:
        raise ConfigError(f"alpha must be nonnegative, got {alpha}")
    xn = x / (W - 1)
    yn = y / (H - 1)
    return alpha * np.concatenate([feature_map(xn, grid), feature_map(yn, grid)])


def encode_grid(W: int, H: int, alpha: float, grid: PivotGrid) -> np.ndarray:
    """Codes for every location of a W x H map, one column per pixel.

    Column n corresponds to pixel (x, y) with n = y*W + x, matching the
    row-major flattening of a d x H x W feature tensor.
    """
    if W < 2 or H < 2:
        raise ConfigError(f"grid must be at least 2x2 to normalize coordinates, got W={W}, H={H}")
    if alpha < 0:
        raise ConfigError(f"alpha must be nonnegative, got {alpha}")
    xs = np.arange(W) / (W - 1)
    ys = np.arange(H) / (H - 1)
    fx = feature_map(xs, grid)          # W x Z
    fy = feature_map(ys, grid)          # H x Z
    Z = grid.Z
    out = np.empty((2 * Z, H * W))
    for yy in range(H):
        cols = slice(yy * W, (yy + 1) * W)
        out[:Z, cols] = fx.T
        out[Z:, cols] = np.repeat(fy[yy][:, None], W, axis=1)
    return alpha * out
