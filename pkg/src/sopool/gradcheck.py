"""Finite-difference oracle for backward passes.

central_diff_grad perturbs one matrix entry at a time with a symmetric
step h (default 1e-6 in float64, balancing truncation against rounding)
and stacks (f(x+h) - f(x-h)) / 2h into a gradient matrix. compare scores
an analytic gradient against it with the per-entry relative error

    |a - n| / max(|a|, |n|, abs_floor)

so near-zero entries are judged on the absolute floor instead of a 0/0
ratio. Losses used in checks are <W, Psi> with a fixed random symmetric
W, which makes the upstream gradient exactly W.

central_diff_grad_sym is the same oracle for losses over a symmetric
matrix argument: it perturbs (i, j) and (j, i) jointly, so the result is
the symmetric gradient dl/dM that analytic backward rules produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, NumericError, ValidationError

__all__ = ["GradReport", "central_diff_grad", "central_diff_grad_sym", "compare"]

DEFAULT_H = 1e-6
ABS_FLOOR = 1e-8


@dataclass(frozen=True)
class GradReport:
    max_rel_err: float
    max_abs_err: float
    worst_index: tuple[int, int]
    h: float
    passed: bool


def central_diff_grad(f: Callable[[np.ndarray], float], Phi: np.ndarray, h: float = DEFAULT_H) -> np.ndarray:
    """Entry-wise central differences of a scalar loss over a matrix."""
    if h <= 0:
        raise ValidationError(f"step size must be positive, got {h}")
    Phi = np.asarray(Phi, dtype=np.float64)
    grad = np.empty_like(Phi)
    it = np.nditer(Phi, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = Phi[idx]
        Phi[idx] = orig + h
        fp = f(Phi)
        Phi[idx] = orig - h
        fm = f(Phi)
        Phi[idx] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericError(f"loss is non-finite when perturbing entry {idx}")
        grad[idx] = (fp - fm) / (2.0 * h)
    return grad


def central_diff_grad_sym(f: Callable[[np.ndarray], float], M: np.ndarray, h: float = DEFAULT_H) -> np.ndarray:
    """Central differences over a symmetric matrix, perturbing (i,j) with (j,i).

    Returns the symmetric gradient G with df = <G, dM> for symmetric dM.
    """
    if h <= 0:
        raise ValidationError(f"step size must be positive, got {h}")
    M = np.array(M, dtype=np.float64, copy=True)
    n = M.shape[0]
    G = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            step = np.zeros((n, n))
            step[i, j] = h
            step[j, i] = h
            fp = f(M + step)
            fm = f(M - step)
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise NumericError(f"loss is non-finite when perturbing entry {(i, j)}")
            val = (fp - fm) / (2.0 * h)
            # joint perturbation reads off G_ij + G_ji
            G[i, j] = val / (2.0 if i != j else 1.0)
            G[j, i] = G[i, j]
    return G


def compare(
    analytic: np.ndarray,
    numeric: np.ndarray,
    rel_tol: float = 1e-5,
    abs_tol: float = ABS_FLOOR,
    h: float = DEFAULT_H,
) -> GradReport:
    """Score analytic vs numeric gradients entry by entry.

    An entry passes when |a - n| <= rel_tol * max(|a|, |n|) + abs_tol, so
    differences below abs_tol are accepted outright; finite differences
    carry that much noise no matter how small the true gradient is. The
    reported error is diff / (magnitude + abs_tol / rel_tol), which makes
    `max_rel_err <= rel_tol` equivalent to that acceptance rule.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.shape != numeric.shape:
        raise DimensionError(
            f"gradient shapes differ: {analytic.shape} vs {numeric.shape}"
        )
    diff = np.abs(analytic - numeric)
    denom = np.maximum(np.abs(analytic), np.abs(numeric)) + abs_tol / rel_tol
    rel = diff / denom
    worst_flat = int(np.argmax(rel))
    worst = np.unravel_index(worst_flat, rel.shape) if rel.ndim else (0, 0)
    if len(worst) == 1:
        worst = (int(worst[0]), 0)
    max_rel = float(rel.flat[worst_flat]) if rel.size else 0.0
    max_abs = float(np.max(diff)) if diff.size else 0.0
    return GradReport(
        max_rel_err=max_rel,
        max_abs_err=max_abs,
        worst_index=(int(worst[0]), int(worst[1])),
        h=h,
        passed=max_rel <= rel_tol,
    )
