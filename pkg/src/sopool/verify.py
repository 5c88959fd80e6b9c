"""Property suites behind the verify command.

Each suite runs a family of checks and reports pass/fail plus the worst
offender. The case builders are module-level so the test suite can run
them at acceptance-scale instance counts while the CLI runs a quicker
sweep; both share one implementation of what a "case" is.

Losses are <W, Psi> with a fixed random symmetric W, so the upstream
gradient handed to the backward rules is exactly W.
"""

from __future__ import annotations

import numpy as np

from . import elementwise
from .aggregate import FeatureBatch, augment, center_columns, cooc_matrix
from .elementwise import KINDS, PNConfig, pn_bwd, pn_fwd
from .errors import ConfigError
from .gradcheck import GradReport, central_diff_grad, central_diff_grad_sym, compare
from .linalg import sym, sym_eig
from .probmodel import BernoulliPool, binom_at_least_one, multinom_at_least_one
from .spectral import (
    SPECTRAL_KINDS,
    SpectralPlan,
    _psi_pair,
    closed_form_fwd,
    maxexp_spectral_bwd_closed,
    spectral_bwd_eigen,
    spectral_dM,
    spectral_fwd,
    spectral_pool,
    sqrt_bwd_sylvester,
)

__all__ = [
    "elementwise_case",
    "spectral_eigen_case",
    "sylvester_agreement",
    "maxexp_closed_agreement",
    "spectral_pool_case",
    "dual_forward_error",
    "run_suites",
    "SUITES",
]

# beta values exercised per kind: Gamma/MaxExp admit only beta = 0
BETAS = {
    "Average": (0.0, 0.5),
    "Gamma": (0.0,),
    "MaxExp": (0.0,),
    "SigmE": (0.0, 0.5),
    "SigmE-trace": (0.0, 0.5),
    "AsinhE": (0.0, 0.5),
}


def _instance_dims(rng: np.random.Generator) -> tuple[int, int, int]:
    d = int(rng.choice([3, 8]))
    Zp = int(rng.choice([0, 6]))
    N = int(rng.choice([5, 20]))
    return d, Zp, N


def _random_pd(rng: np.random.Generator, dim: int, shift: float = 0.05) -> np.ndarray:
    n = 3 * dim + 4
    X = rng.standard_normal((dim, n))
    return sym(X @ X.T / n + shift * np.eye(dim))


def _config_for(kind: str, beta: float) -> PNConfig:
    return PNConfig(kind=kind, gamma=0.5, eta=20.0, gammaP=10.0, etaP=20.0, beta=beta)


def elementwise_case(kind: str, beta: float, rng: np.random.Generator,
                     dims: tuple[int, int, int] | None = None) -> GradReport:
    """One element-wise gradcheck: analytic pn_bwd vs central differences."""
    d, Zp, N = dims if dims is not None else _instance_dims(rng)
    cfg = _config_for(kind, beta)
    if kind in ("Gamma", "MaxExp"):
        Phi = rng.uniform(0.05, 1.0, (d, N))
    else:
        Phi = np.maximum(rng.standard_normal((d, N)), 0.0) + 0.05
    codes = rng.uniform(0.0, 0.5, (Zp, N))
    W = sym(rng.standard_normal((d + Zp, d + Zp)))

    def loss(P):
        aug = augment(FeatureBatch(Phi=center_columns(P, beta)), codes)
        return float(np.sum(W * pn_fwd(cooc_matrix(aug), cfg)))

    aug = augment(FeatureBatch(Phi=center_columns(Phi, beta)), codes)
    M = cooc_matrix(aug)
    analytic = pn_bwd(kind, M, aug, W, cfg).dPhi
    numeric = central_diff_grad(loss, Phi.copy())
    return compare(analytic, numeric)


def spectral_eigen_case(kind: str, rng: np.random.Generator, dim: int = 6) -> GradReport:
    """Divided-difference backward vs central differences of the fixed-psi map."""
    M = _random_pd(rng, dim)
    W = sym(rng.standard_normal((dim, dim)))
    cfg = _config_for(kind if kind in KINDS else "SigmE", 0.0)
    tau = float(np.trace(M)) + cfg.lam
    psi, dpsi = _psi_pair(kind, cfg, tau)

    def loss(A):
        pair = sym_eig(sym(A))
        return float(np.sum(W * ((pair.vectors * psi(pair.values)) @ pair.vectors.T)))

    analytic = spectral_bwd_eigen(M, W, psi, dpsi)
    numeric = central_diff_grad_sym(loss, M)
    return compare(analytic, numeric)


def sylvester_agreement(rng: np.random.Generator, dim: int = 6) -> float:
    """Max abs difference between the Sylvester and eigen sqrt backwards."""
    M = _random_pd(rng, dim, shift=0.3)
    W = sym(rng.standard_normal((dim, dim)))
    a = sqrt_bwd_sylvester(M, W)
    b = spectral_bwd_eigen(M, W, np.sqrt, lambda x: 0.5 / np.sqrt(x))
    return float(np.max(np.abs(a - b)))


def maxexp_closed_agreement(rng: np.random.Generator, eta: int, dim: int = 6) -> tuple[float, GradReport]:
    """Closed-form MaxExp backward vs eigen path and vs finite differences."""
    M = _random_pd(rng, dim)
    W = sym(rng.standard_normal((dim, dim)))
    cfg = PNConfig(kind="MaxExp", eta=float(eta))
    plan = SpectralPlan(kind="MaxExp", path="eigen", params=cfg)
    closed = maxexp_spectral_bwd_closed(M, W, eta, cfg.lam)
    eigenful = spectral_dM(M, W, plan)
    gap = float(np.max(np.abs(closed - eigenful)))

    def loss(A):
        A = sym(A)
        return float(np.sum(W * spectral_fwd(A, plan)))

    report = compare(closed, central_diff_grad_sym(loss, M))
    return gap, report


def spectral_pool_case(kind: str, rng: np.random.Generator,
                       d: int = 4, Zp: int = 2, N: int = 6) -> GradReport:
    """End-to-end spectral gradcheck from features through pooling."""
    cfg = _config_for(kind if kind in KINDS else "SigmE", 0.0)
    plan = SpectralPlan(kind=kind, path="eigen", params=cfg)
    Phi = rng.uniform(0.05, 1.0, (d, N))
    codes = rng.uniform(0.0, 0.5, (Zp, N))
    W = sym(rng.standard_normal((d + Zp, d + Zp)))

    def loss(P):
        aug = augment(FeatureBatch(Phi=P), codes)
        return float(np.sum(W * spectral_fwd(cooc_matrix(aug), plan)))

    aug = augment(FeatureBatch(Phi=Phi), codes)
    M = cooc_matrix(aug)
    analytic = spectral_pool(M, aug, W, plan).dPhi
    numeric = central_diff_grad(loss, Phi.copy())
    return compare(analytic, numeric)


def dual_forward_error(kind: str, rng: np.random.Generator, dim: int = 6) -> float:
    """Relative Frobenius gap between eigen-substitution and closed forms."""
    M = _random_pd(rng, dim)
    cfg = _config_for(kind if kind in KINDS else "SigmE", 0.0)
    plan = SpectralPlan(kind=kind, path="eigen", params=cfg)
    a = spectral_fwd(M, plan)
    b = closed_form_fwd(M, kind, cfg)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-30))


# ---------------------------------------------------------------------------
# suites

def _suite_probmodel_binomial() -> dict:
    worst = 0.0
    for N in (1, 2, 5, 12, 21, 30):
        for p in np.linspace(0.0, 1.0, 101):
            pool = BernoulliPool(N=N, p=float(p))
            worst = max(worst, abs(binom_at_least_one(pool) - (1.0 - (1.0 - p) ** N)))
    return {"suite": "probmodel-binomial", "passed": bool(worst <= 1e-12), "worst_abs_err": float(worst)}


def _suite_probmodel_multinomial() -> dict:
    worst = 0.0
    for N in (2, 5, 9, 12):
        for p in (0.0, 0.15, 0.4, 0.8):
            for q in np.linspace(0.0, 1.0 - p, 4):
                for s in np.linspace(0.0, 1.0 - p - q, 3):
                    pool = BernoulliPool(N=N, p=p, q=float(q), s=float(s))
                    worst = max(
                        worst,
                        abs(multinom_at_least_one(pool) - (1.0 - (1.0 - p) ** N)),
                    )
    return {"suite": "probmodel-multinomial", "passed": bool(worst <= 1e-10), "worst_abs_err": float(worst)}


def _suite_spectral_dual_forward() -> dict:
    rng = np.random.default_rng(101)
    worst, failures = 0.0, []
    for kind in SPECTRAL_KINDS:
        for i in range(8):
            err = dual_forward_error(kind, rng, dim=int(rng.integers(2, 9)))
            worst = max(worst, err)
            if err > 1e-10:
                failures.append(f"{kind} instance {i}: {err:.3e}")
    return {
        "suite": "spectral-dual-forward",
        "passed": not failures,
        "worst_rel_frobenius": float(worst),
        "failed": failures,
    }


def _suite_spectral_dual_backward() -> dict:
    rng = np.random.default_rng(202)
    failures = []
    worst = 0.0
    for i in range(8):
        gap = sylvester_agreement(rng, dim=int(rng.integers(2, 9)))
        worst = max(worst, gap)
        if gap > 1e-8:
            failures.append(f"sqrt sylvester-vs-eigen instance {i}: {gap:.3e}")
    for eta in (1, 2, 4, 7):
        for i in range(4):
            gap, report = maxexp_closed_agreement(rng, eta, dim=int(rng.integers(2, 9)))
            worst = max(worst, gap)
            if gap > 1e-8:
                failures.append(f"MaxExp closed-vs-eigen eta={eta} instance {i}: {gap:.3e}")
            if not report.passed:
                failures.append(
                    f"MaxExp closed-vs-FD eta={eta} instance {i}: {report.max_rel_err:.3e}"
                )
    return {
        "suite": "spectral-dual-backward",
        "passed": not failures,
        "worst_abs_gap": float(worst),
        "failed": failures,
    }


def _suite_gradcheck_elementwise() -> dict:
    rng = np.random.default_rng(303)
    failures = []
    worst = 0.0
    for kind in KINDS:
        for beta in BETAS[kind]:
            for i in range(4):
                report = elementwise_case(kind, beta, rng)
                worst = max(worst, report.max_rel_err)
                if not report.passed:
                    failures.append(
                        f"{kind} beta={beta} instance {i}: rel err {report.max_rel_err:.3e}"
                    )
    return {
        "suite": "gradcheck-elementwise",
        "passed": not failures,
        "worst_rel_err": float(worst),
        "failed": failures,
    }


def _suite_gradcheck_spectral() -> dict:
    rng = np.random.default_rng(404)
    failures = []
    worst = 0.0
    for kind in SPECTRAL_KINDS:
        for i in range(3):
            report = spectral_eigen_case(kind, rng, dim=int(rng.integers(2, 9)))
            worst = max(worst, report.max_rel_err)
            if not report.passed:
                failures.append(
                    f"{kind} eigen instance {i}: rel err {report.max_rel_err:.3e}"
                )
        report = spectral_pool_case(kind, rng)
        worst = max(worst, report.max_rel_err)
        if not report.passed:
            failures.append(f"{kind} pool: rel err {report.max_rel_err:.3e}")
    return {
        "suite": "gradcheck-spectral",
        "passed": not failures,
        "worst_rel_err": float(worst),
        "failed": failures,
    }


SUITES = {
    "probmodel-binomial": _suite_probmodel_binomial,
    "probmodel-multinomial": _suite_probmodel_multinomial,
    "spectral-dual-forward": _suite_spectral_dual_forward,
    "spectral-dual-backward": _suite_spectral_dual_backward,
    "gradcheck-elementwise": _suite_gradcheck_elementwise,
    "gradcheck-spectral": _suite_gradcheck_spectral,
}


def run_suites(suite: str | None = None, break_sign: bool = False) -> tuple[list[dict], bool]:
    """Run all suites (or those whose name starts with `suite`)."""
    names = [n for n in SUITES if suite is None or n.startswith(suite)]
    if not names:
        raise ConfigError(
            f"no suite matches {suite!r}; available: {', '.join(SUITES)}"
        )
    results = []
    elementwise._set_break_sign(break_sign)
    try:
        for name in names:
            results.append(SUITES[name]())
    finally:
        elementwise._set_break_sign(False)
    return results, all(r["passed"] for r in results)
