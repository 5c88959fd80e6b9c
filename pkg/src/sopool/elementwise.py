"""Element-wise power normalization: forward rules and analytic backward.

Each kind applies a scalar map psi entry-by-entry to the pooled matrix M
(trace-normalized first where noted), chosen to boost weak co-occurrence
evidence and saturate strong evidence:

    Average      psi(p) = p
    Gamma        psi(p) = (lam + p)^gamma          requires p >= 0
    MaxExp       psi(p) = 1 - (1 - p/tau)^eta      requires p >= 0
    SigmE        psi(p) = 2/(1 + e^(-etaP p)) - 1
    SigmE-trace  same as SigmE on p/tau
    AsinhE       psi(p) = asinh(gammaP p)

with tau = trace(M) + lam. MaxExp is the probability of at least one
success in eta Bernoulli trials at rate p/tau; Gamma approximates it;
SigmE and AsinhE are surrogates whose derivatives stay finite at zero and
which accept the negative entries produced by beta-centering.

Backward: with W = sym(dl/dPsi), the gradient through M = (1/N) PhiBar
PhiBar^T is dl/dPhi = (2/N) sym(G)[:d] PhiBar where G = dl/dM. For the
un-normalized kinds G = W .* psi'(M). For the trace-normalized kinds the
scalar tau couples every output entry to the whole diagonal, so G picks
up a rank-one trace correction beyond any element-wise factor:

    G = (W .* E) / tau - (<W .* E, M> / tau^2) I,   E = psi'(M / tau).

Finite differences confirm this exact form (and reject the purely
element-wise approximation, whose error is O(1), not O(h^2)).

beta-centering is part of the pooling layer, so its chain rule is applied
here: g_n -= (beta/N) sum_m g_m. The returned dPhi is with respect to the
post-rectification, pre-centering features; chaining through the ReLU of
a backbone is the caller's job.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .aggregate import AugmentedBatch, CoocMatrix
from .errors import ConfigError, DimensionError, DomainError, NumericError, ValidationError
from .linalg import sym

__all__ = [
    "KINDS",
    "PNConfig",
    "PoolGradient",
    "gamma_fwd",
    "maxexp_fwd",
    "sigme_fwd",
    "asinhe_fwd",
    "pn_fwd",
    "apply_variants",
    "dM_dPhi_contract",
    "pn_bwd",
    "maxexp_scalar",
    "dpsi_gamma",
    "dpsi_maxexp",
    "dpsi_sigme",
    "dpsi_asinhe",
]

KINDS = ("Average", "Gamma", "MaxExp", "SigmE", "SigmE-trace", "AsinhE")

# Fault-injection hook for the verify command's mutation test: when True,
# the MaxExp backward flips sign so its gradient check must fail.
_BREAK_MAXEXP_SIGN = False


def _set_break_sign(flag: bool) -> None:
    global _BREAK_MAXEXP_SIGN
    _BREAK_MAXEXP_SIGN = bool(flag)


@dataclass(frozen=True)
class PNConfig:
    """Pooling hyperparameters; invalid combinations fail at construction."""

    kind: str = "SigmE"
    gamma: float = 0.5
    eta: float = 20.0
    gammaP: float = 10.0
    etaP: float = 20.0
    lam: float = 1e-6
    beta: float = 0.0
    kappa: float = 1e-3
    trace_comp: bool = False
    residual: bool = False
    trace_comp_exponent: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}, expected one of {KINDS}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.eta < 1.0:
            raise ConfigError(f"eta must be >= 1, got {self.eta}")
        if self.gammaP <= 0.0:
            raise ConfigError(f"gammaP must be positive, got {self.gammaP}")
        if self.etaP < 1.0:
            raise ConfigError(f"etaP must be >= 1, got {self.etaP}")
        if self.lam <= 0.0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if self.kappa < 0.0:
            raise ConfigError(f"kappa must be nonnegative, got {self.kappa}")
        if self.kind in ("Gamma", "MaxExp") and self.beta != 0.0:
            raise ValidationError(
                f"{self.kind} pooling requires beta = 0: negative matrix entries "
                f"from centering are outside its domain (got beta = {self.beta})"
            )


@dataclass(frozen=True)
class PoolGradient:
    upstream: np.ndarray
    dPhi: np.ndarray


# ---------------------------------------------------------------------------
# scalar family (entry-wise maps and their derivatives)

def maxexp_scalar(p, eta: float):
    """Un-normalized pooling rule 1 - (1 - p)^eta (probability of >= 1 success)."""
    return 1.0 - (1.0 - np.asarray(p, dtype=np.float64)) ** eta


def dpsi_gamma(p, gamma: float, lam: float = 0.0):
    return gamma * (lam + np.asarray(p, dtype=np.float64)) ** (gamma - 1.0)


def dpsi_maxexp(p, eta: float):
    return eta * (1.0 - np.asarray(p, dtype=np.float64)) ** (eta - 1.0)


def dpsi_sigme(p, etaP: float):
    # 2/(1+e^(-x)) - 1 == tanh(x/2); the tanh form never overflows
    t = np.tanh(0.5 * etaP * np.asarray(p, dtype=np.float64))
    return 0.5 * etaP * (1.0 - t * t)


def dpsi_asinhe(p, gammaP: float):
    p = np.asarray(p, dtype=np.float64)
    return gammaP / np.sqrt(1.0 + (gammaP * p) ** 2)


# ---------------------------------------------------------------------------
# forwards

def _mat_and_trace(M) -> tuple[np.ndarray, float]:
    if isinstance(M, CoocMatrix):
        return M.M, M.traceval
    M = np.asarray(M, dtype=np.float64)
    return M, float(np.trace(M))


def gamma_fwd(M, cfg: PNConfig) -> np.ndarray:
    Mv, _ = _mat_and_trace(M)
    if np.any(Mv < 0):
        raise DomainError(
            "Gamma pooling needs nonnegative entries (fractional power of a "
            "negative value); use beta = 0 or a sign-tolerant kind"
        )
    return (cfg.lam + Mv) ** cfg.gamma


def maxexp_fwd(M, cfg: PNConfig) -> np.ndarray:
    Mv, tr = _mat_and_trace(M)
    P = Mv / (tr + cfg.lam)
    if np.any(P < 0):
        raise DomainError(
            "MaxExp pooling needs nonnegative entries; use beta = 0 or a "
            "sign-tolerant kind"
        )
    if np.any(P > 1.0 + 1e-12):
        raise NumericError(
            "trace-normalized entry exceeds 1; input is not a valid PSD "
            "co-occurrence matrix"
        )
    return 1.0 - (1.0 - P) ** cfg.eta


def sigme_fwd(M, cfg: PNConfig) -> np.ndarray:
    Mv, tr = _mat_and_trace(M)
    scale = 0.5 * cfg.etaP
    if cfg.kind == "SigmE-trace":
        scale /= tr + cfg.lam
    # one output buffer; a second temporary costs real time at large dims
    out = np.multiply(Mv, scale)
    return np.tanh(out, out=out)


def asinhe_fwd(M, cfg: PNConfig) -> np.ndarray:
    Mv, _ = _mat_and_trace(M)
    return np.arcsinh(cfg.gammaP * Mv)


def apply_variants(Psi: np.ndarray, M, cfg: PNConfig) -> np.ndarray:
    """Optional trace compensation (scale by tau^e) and residual term (+ kappa M)."""
    Mv, tr = _mat_and_trace(M)
    out = np.asarray(Psi, dtype=np.float64)
    if cfg.trace_comp:
        e = cfg.gamma if cfg.trace_comp_exponent is None else cfg.trace_comp_exponent
        out = out * (tr + cfg.lam) ** e
    if cfg.residual:
        out = out + cfg.kappa * Mv
    return out


def pn_fwd(M, cfg: PNConfig) -> np.ndarray:
    """Forward dispatch on cfg.kind, variants included."""
    Mv, _ = _mat_and_trace(M)
    if cfg.kind == "Average":
        Psi = np.array(Mv, copy=True)
    elif cfg.kind == "Gamma":
        Psi = gamma_fwd(M, cfg)
    elif cfg.kind == "MaxExp":
        Psi = maxexp_fwd(M, cfg)
    elif cfg.kind in ("SigmE", "SigmE-trace"):
        Psi = sigme_fwd(M, cfg)
    elif cfg.kind == "AsinhE":
        Psi = asinhe_fwd(M, cfg)
    else:  # unreachable: PNConfig validates kind
        raise ConfigError(f"unknown kind {cfg.kind!r}")
    if cfg.trace_comp or cfg.residual:
        Psi = apply_variants(Psi, M, cfg)
    return Psi


# ---------------------------------------------------------------------------
# backward

def dM_dPhi_contract(G: np.ndarray, aug: AugmentedBatch) -> np.ndarray:
    """Map a gradient on M to a gradient on the feature rows.

    dl/dPhi = (2/N) * sym(G)[:d, :] @ PhiBar; the code rows carry no
    gradient because the spatial encoding is not a function of Phi.
    """
    G = np.asarray(G, dtype=np.float64)
    dim = aug.PhiBar.shape[0]
    if G.shape != (dim, dim):
        raise DimensionError(f"gradient must be {dim}x{dim}, got {G.shape}")
    return (2.0 / aug.N) * sym(G)[: aug.d, :] @ aug.PhiBar


def _dM_from_upstream(kind: str, Mv: np.ndarray, tr: float, W: np.ndarray, cfg: PNConfig) -> np.ndarray:
    """Exact dl/dM for the base (variant-free) forward of the given kind."""
    if kind == "Average":
        return np.array(W, copy=True)
    if kind == "Gamma":
        if np.any(Mv < 0):
            raise DomainError("Gamma backward needs nonnegative entries")
        return W * dpsi_gamma(Mv, cfg.gamma, cfg.lam)
    if kind == "SigmE":
        return W * dpsi_sigme(Mv, cfg.etaP)
    if kind == "AsinhE":
        return W * dpsi_asinhe(Mv, cfg.gammaP)

    tau = tr + cfg.lam
    P = Mv / tau
    if kind == "MaxExp":
        if np.any(P < 0):
            raise DomainError("MaxExp backward needs nonnegative entries")
        E = dpsi_maxexp(P, cfg.eta)
        sign = -1.0 if _BREAK_MAXEXP_SIGN else 1.0
    elif kind == "SigmE-trace":
        E = dpsi_sigme(P, cfg.etaP)
        sign = 1.0
    else:
        raise ConfigError(f"unknown kind {kind!r}")
    WE = W * E
    G = WE / tau - (np.sum(WE * Mv) / tau**2) * np.eye(Mv.shape[0])
    return sign * G


def pn_bwd(kind: str, M, aug: AugmentedBatch, upstream: np.ndarray, cfg: PNConfig) -> PoolGradient:
    """Analytic gradient of <upstream, pn_fwd(M(Phi))> with respect to Phi."""
    if kind != cfg.kind:
        cfg = replace(cfg, kind=kind)
    Mv, tr = _mat_and_trace(M)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != Mv.shape:
        raise DimensionError(
            f"upstream gradient must match M, got {upstream.shape} vs {Mv.shape}"
        )
    W = sym(upstream)

    if cfg.trace_comp or cfg.residual:
        tau = tr + cfg.lam
        e = cfg.gamma if cfg.trace_comp_exponent is None else cfg.trace_comp_exponent
        scale = tau**e if cfg.trace_comp else 1.0
        G = _dM_from_upstream(kind, Mv, tr, W * scale, cfg)
        if cfg.trace_comp:
            # tau^e itself depends on M through the trace
            base = replace(cfg, trace_comp=False, residual=False)
            Psi_inner = pn_fwd(Mv, base)
            G = G + e * tau ** (e - 1.0) * np.sum(W * Psi_inner) * np.eye(Mv.shape[0])
        if cfg.residual:
            G = G + cfg.kappa * W
    else:
        G = _dM_from_upstream(kind, Mv, tr, W, cfg)

    dPhi = dM_dPhi_contract(G, aug)
    if cfg.beta > 0:
        dPhi = dPhi - (cfg.beta / aug.N) * np.sum(dPhi, axis=1, keepdims=True)
    return PoolGradient(upstream=upstream, dPhi=dPhi)
