"""Spectral power normalization: apply the scalar family to eigenvalues.

Forward: Psi = U diag(psi(lambda)) U^T for an eigendecomposition of M.
Each kind also has a closed matrix form (fractional/integer matrix power,
matrix log/sqrt, matrix exponential) that must agree with the eigenvalue
substitution; the closed forms here go through scipy's Schur-based
routines precisely so the two routes share no code.

Backward through the eigendecomposition uses the divided-difference
(Loewner) rule: for fixed scalar psi,

    dl/dM = U (K .* (U^T W U)) U^T,
    K_ij = (psi(l_i) - psi(l_j)) / (l_i - l_j),  K_ii = psi'(l_i),

with near-ties |l_i - l_j| < 1e-8 max(|l_i|, |l_j|, 1) replaced by
psi'((l_i + l_j)/2) to keep K bounded. For the trace-normalized kinds
(MaxExp, SigmE) psi itself depends on M through tau = tr(M) + lam, so the
full derivative adds a rank-one correction

    dl/dM += <W, U diag(dpsi/dtau) U^T> I,

which spectral_pool includes; spectral_bwd_eigen alone differentiates the
frozen-psi map. Two independent closed backward routes exist as oracles:
the Sylvester solve for the matrix square root (gamma = 0.5) and a power-
sum chain rule for integer-eta MaxExp; both match the eigen path to well
under 1e-8.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .aggregate import AugmentedBatch
from .elementwise import PNConfig, PoolGradient, _mat_and_trace, dM_dPhi_contract
from .errors import ConfigError, DimensionError, DomainError, RankDeficiencyError
from .linalg import sym, sym_eig

__all__ = [
    "SPECTRAL_KINDS",
    "SpectralPlan",
    "spectral_fwd",
    "closed_form_fwd",
    "spectral_bwd_eigen",
    "sqrt_bwd_sylvester",
    "maxexp_spectral_bwd_closed",
    "spectral_dM",
    "spectral_pool",
]

SPECTRAL_KINDS = ("Gamma", "MaxExp", "AsinhE", "SigmE")
PATHS = ("eigen", "closed-form")

# eigenvalue gap below which the divided difference switches to psi'
DEGENERACY_RTOL = 1e-8

# materialize the Kronecker pseudo-inverse only for small matrices
SYLVESTER_KRON_MAX_DIM = 32


@dataclass(frozen=True)
class SpectralPlan:
    kind: str = "MaxExp"
    path: str = "eigen"
    params: PNConfig = field(default_factory=lambda: PNConfig(kind="MaxExp"))

    def __post_init__(self):
        if self.kind not in SPECTRAL_KINDS:
            raise ConfigError(
                f"unknown spectral kind {self.kind!r}, expected one of {SPECTRAL_KINDS}"
            )
        if self.path not in PATHS:
            raise ConfigError(f"unknown path {self.path!r}, expected one of {PATHS}")
        if self.path == "closed-form":
            p = self.params
            ok = (self.kind == "MaxExp" and float(p.eta).is_integer()) or (
                self.kind == "Gamma" and p.gamma == 0.5
            )
            if not ok:
                raise ConfigError(
                    "closed-form path exists only for MaxExp with integer eta "
                    "and Gamma with gamma = 0.5; use the eigen path"
                )


def _checked_psd_eigvals(values: np.ndarray) -> np.ndarray:
    """Clamp roundoff-negative eigenvalues; reject genuinely indefinite input."""
    tol = DEGENERACY_RTOL * 1e-2 * max(1.0, float(np.max(np.abs(values), initial=0.0)))
    if np.any(values < -tol):
        raise DomainError(
            f"matrix is indefinite (eigenvalue {float(np.min(values)):.6e}); "
            f"fractional powers are undefined"
        )
    return np.clip(values, 0.0, None)


def _psi_pair(kind: str, cfg: PNConfig, tau: float) -> tuple[Callable, Callable]:
    """Scalar map and derivative on eigenvalues, tau held fixed."""
    if kind == "Gamma":
        g = cfg.gamma
        return (lambda x: x**g, lambda x: g * x ** (g - 1.0))
    if kind == "MaxExp":
        eta = cfg.eta
        return (
            lambda x: 1.0 - (1.0 - x / tau) ** eta,
            lambda x: (eta / tau) * (1.0 - x / tau) ** (eta - 1.0),
        )
    if kind == "SigmE":
        etaP = cfg.etaP

        def psi(x):
            return np.tanh(0.5 * etaP * x / tau)

        def dpsi(x):
            t = np.tanh(0.5 * etaP * x / tau)
            return (0.5 * etaP / tau) * (1.0 - t * t)

        return psi, dpsi
    if kind == "AsinhE":
        gP = cfg.gammaP
        return (
            lambda x: np.arcsinh(gP * x),
            lambda x: gP / np.sqrt(1.0 + (gP * x) ** 2),
        )
    raise ConfigError(f"unknown spectral kind {kind!r}")


def _dpsi_dtau(kind: str, cfg: PNConfig, tau: float, values: np.ndarray) -> np.ndarray | None:
    """Derivative of the scalar map with respect to tau, None if independent."""
    if kind == "MaxExp":
        return -cfg.eta * (1.0 - values / tau) ** (cfg.eta - 1.0) * values / tau**2
    if kind == "SigmE":
        t = np.tanh(0.5 * cfg.etaP * values / tau)
        return -(0.5 * cfg.etaP * values / tau**2) * (1.0 - t * t)
    return None


def spectral_fwd(M, plan: SpectralPlan) -> np.ndarray:
    """Psi = U diag(psi(lambda)) U^T (or the closed matrix form, if planned)."""
    Mv, tr = _mat_and_trace(M)
    if plan.path == "closed-form":
        return closed_form_fwd(Mv, plan.kind, plan.params)
    tau = tr + plan.params.lam
    pair = sym_eig(Mv)
    values = pair.values
    if plan.kind == "Gamma":
        values = _checked_psd_eigvals(values)
    psi, _ = _psi_pair(plan.kind, plan.params, tau)
    return sym((pair.vectors * psi(values)) @ pair.vectors.T)


def closed_form_fwd(M, kind: str, cfg: PNConfig) -> np.ndarray:
    """Closed matrix forms of the spectral family, via scipy matrix functions."""
    Mv, tr = _mat_and_trace(M)
    dim = Mv.shape[0]
    tau = tr + cfg.lam
    eye = np.eye(dim)
    if kind == "Gamma":
        _checked_psd_eigvals(np.linalg.eigvalsh(Mv))
        out = scipy.linalg.fractional_matrix_power(Mv, cfg.gamma)
    elif kind == "MaxExp":
        A = eye - Mv / tau
        if float(cfg.eta).is_integer():
            out = eye - np.linalg.matrix_power(A, int(cfg.eta))
        else:
            out = eye - scipy.linalg.fractional_matrix_power(A, cfg.eta)
    elif kind == "AsinhE":
        S = scipy.linalg.sqrtm(eye + cfg.gammaP**2 * (Mv @ Mv))
        out = scipy.linalg.logm(cfg.gammaP * Mv + S)
    elif kind == "SigmE":
        out = 2.0 * np.linalg.inv(eye + scipy.linalg.expm(-cfg.etaP * Mv / tau)) - eye
    else:
        raise ConfigError(f"unknown spectral kind {kind!r}")
    return sym(np.real(out))


def spectral_bwd_eigen(M, upstream: np.ndarray, psi: Callable, dpsi: Callable) -> np.ndarray:
    """Divided-difference backward for the fixed-psi spectral map."""
    Mv, _ = _mat_and_trace(M)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != Mv.shape:
        raise DimensionError(
            f"upstream gradient must match M, got {upstream.shape} vs {Mv.shape}"
        )
    pair = sym_eig(Mv)
    lv, U = pair.values, pair.vectors
    fv = np.asarray(psi(lv), dtype=np.float64)

    li = lv[:, None]
    lj = lv[None, :]
    gap = li - lj
    near = np.abs(gap) < DEGENERACY_RTOL * np.maximum(
        np.maximum(np.abs(li), np.abs(lj)), 1.0
    )
    K = np.empty_like(gap)
    safe_gap = np.where(near, 1.0, gap)
    K = (fv[:, None] - fv[None, :]) / safe_gap
    mid = np.asarray(dpsi(0.5 * (li + lj)), dtype=np.float64)
    K = np.where(near, mid, K)

    W = sym(upstream)
    return sym(U @ (K * (U.T @ W @ U)) @ U.T)


def sqrt_bwd_sylvester(M, upstream: np.ndarray) -> np.ndarray:
    """Backward of M^(1/2): solve  M^(1/2) X + X M^(1/2) = sym(upstream).

    Small matrices go through the materialized Kronecker pseudo-inverse of
    (I (x) M^(1/2) + M^(1/2) (x) I); larger ones use the eigenbasis solve.
    """
    Mv, _ = _mat_and_trace(M)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != Mv.shape:
        raise DimensionError(
            f"upstream gradient must match M, got {upstream.shape} vs {Mv.shape}"
        )
    pair = sym_eig(Mv)
    lv, U = pair.values, pair.vectors
    smallest = float(np.min(lv))
    if smallest <= 1e-12 * max(1.0, float(np.max(lv, initial=0.0))):
        raise RankDeficiencyError(smallest)
    s = np.sqrt(lv)
    W = sym(upstream)
    dim = Mv.shape[0]
    if dim <= SYLVESTER_KRON_MAX_DIM:
        S = sym((U * s) @ U.T)
        P = np.kron(np.eye(dim), S) + np.kron(S, np.eye(dim))
        X = (np.linalg.pinv(P) @ W.reshape(-1)).reshape(dim, dim)
    else:
        X = U @ ((U.T @ W @ U) / (s[:, None] + s[None, :])) @ U.T
    return sym(X)


def maxexp_spectral_bwd_closed(M, upstream: np.ndarray, eta: int, lam: float = 1e-6) -> np.ndarray:
    """Power-sum chain rule for spectral MaxExp with integer eta.

    With A = I - M/tau and W = sym(upstream):

        dl/dM = (1/tau) sum_n A^n W A^(eta-1-n)
              - (1/tau^2) (sum_n <W, A^n M A^(eta-1-n)>) I,

    the second term from tau's own dependence on M.
    """
    if not float(eta).is_integer() or eta < 1:
        raise ConfigError(
            f"closed-form MaxExp backward needs integer eta >= 1, got {eta!r}; "
            f"use the eigen path"
        )
    eta = int(eta)
    Mv, tr = _mat_and_trace(M)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != Mv.shape:
        raise DimensionError(
            f"upstream gradient must match M, got {upstream.shape} vs {Mv.shape}"
        )
    tau = tr + lam
    A = np.eye(Mv.shape[0]) - Mv / tau
    W = sym(upstream)
    powers = [np.eye(Mv.shape[0])]
    for _ in range(eta - 1):
        powers.append(powers[-1] @ A)
    G = np.zeros_like(Mv)
    trace_term = 0.0
    for n in range(eta):
        left, right = powers[n], powers[eta - 1 - n]
        G += left @ W @ right
        trace_term += float(np.sum(W * (left @ Mv @ right)))
    G = G / tau - (trace_term / tau**2) * np.eye(Mv.shape[0])
    return sym(G)


def spectral_dM(M, upstream: np.ndarray, plan: SpectralPlan) -> np.ndarray:
    """Full dl/dM of the spectral forward, tau dependence included."""
    Mv, tr = _mat_and_trace(M)
    cfg = plan.params
    if plan.path == "closed-form":
        if plan.kind == "MaxExp":
            return maxexp_spectral_bwd_closed(Mv, upstream, int(cfg.eta), cfg.lam)
        return sqrt_bwd_sylvester(Mv, upstream)

    tau = tr + cfg.lam
    pair = sym_eig(Mv)
    values = pair.values
    if plan.kind == "Gamma":
        values = _checked_psd_eigvals(values)
    psi, dpsi = _psi_pair(plan.kind, cfg, tau)
    G = spectral_bwd_eigen(Mv, upstream, psi, dpsi)
    dtau = _dpsi_dtau(plan.kind, cfg, tau, values)
    if dtau is not None:
        W = sym(np.asarray(upstream, dtype=np.float64))
        corr = float(np.sum(W * ((pair.vectors * dtau) @ pair.vectors.T)))
        G = G + corr * np.eye(Mv.shape[0])
    return G


def spectral_pool(M, aug: AugmentedBatch, upstream: np.ndarray, plan: SpectralPlan) -> PoolGradient:
    """Chain the spectral dl/dM into the feature gradient."""
    G = spectral_dM(M, upstream, plan)
    dPhi = dM_dPhi_contract(G, aug)
    beta = plan.params.beta
    if beta > 0:
        dPhi = dPhi - (beta / aug.N) * np.sum(dPhi, axis=1, keepdims=True)
    return PoolGradient(upstream=np.asarray(upstream, dtype=np.float64), dPhi=dPhi)
