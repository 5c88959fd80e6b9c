"""Synthetic end-to-end training loop exercising the analytic backward.

Data: every class shares one feature signature; classes differ only in
WHERE on the H x W grid the signature fires. With alpha = 0 the pooled
co-occurrence statistics of the classes are therefore (near) identical
and the classifier can barely improve; with alpha > 0 the feature-by-
location co-occurrence block separates them. This isolates the value of
spatial encoding as a direction-only claim.

Model: a learnable d x d map V (init identity) applied to raw features,
ReLU, beta-centering, spatial augmentation, co-occurrence pooling, power
normalization, then a linear softmax classifier on vec(Psi). Gradients
reach V through the pooling backward; V's ReLU mask is chained here since
the pooling layer's dPhi is with respect to post-rectification features.

Optimizer: RMSprop, square-average decay 0.99, epsilon 1e-8. Full-batch,
no shuffling: a fixed seed gives a bit-identical loss curve, and lr = 0
leaves the loss exactly constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggregate import FeatureBatch, augment, center_columns, cooc_matrix
from .elementwise import PNConfig, pn_bwd, pn_fwd
from .errors import ConfigError, NumericError
from .kernelmap import encode_grid, make_pivots
from .spectral import SpectralPlan, spectral_fwd, spectral_pool

__all__ = ["DemoConfig", "demo_train"]

RMS_DECAY = 0.99
RMS_EPS = 1e-8


@dataclass
class DemoConfig:
    pn: PNConfig = field(default_factory=lambda: PNConfig(kind="SigmE"))
    classes: int = 3
    samples_per_class: int = 200
    epochs: int = 50
    lr: float = 0.01
    alpha: float = 1.0
    Z: int = 3
    sigma: float | None = None
    d: int = 6
    H: int = 4
    W: int = 4
    seed: int = 0
    spectral: bool = False


class _RMSProp:
    def __init__(self, shape):
        self.v = np.zeros(shape)

    def step(self, param, grad, lr):
        self.v = RMS_DECAY * self.v + (1.0 - RMS_DECAY) * grad * grad
        param -= lr * grad / (np.sqrt(self.v) + RMS_EPS)


def _make_dataset(cfg: DemoConfig, rng: np.random.Generator):
    """Per-class location blobs with a shared feature signature."""
    H, W, d = cfg.H, cfg.W, cfg.d
    total = cfg.classes * cfg.samples_per_class
    # class-specific grid cells, spread out deterministically
    cells = [(int(c * (H - 1) / max(1, cfg.classes - 1)), (c * 2) % W) for c in range(cfg.classes)]
    signature = 0.5 + rng.random(d)
    X = np.empty((total, d, H * W))
    y = np.empty(total, dtype=np.int64)
    for c in range(cfg.classes):
        yc, xc = cells[c]
        cell = yc * W + xc
        for i in range(cfg.samples_per_class):
            idx = c * cfg.samples_per_class + i
            sample = rng.uniform(0.0, 0.25, (d, H * W))
            jitter = 1.0 + 0.15 * rng.standard_normal(d)
            sample[:, cell] += signature * jitter
            X[idx] = sample
            y[idx] = c
    return X, y


def demo_train(cfg: DemoConfig) -> dict:
    """Run the loop; returns the loss curve and endpoint summary."""
    if cfg.classes < 2:
        raise ConfigError(f"need at least 2 classes, got {cfg.classes}")
    if cfg.epochs < 1:
        raise ConfigError(f"need at least 1 epoch, got {cfg.epochs}")
    if cfg.samples_per_class < 1:
        raise ConfigError(f"need at least 1 sample per class, got {cfg.samples_per_class}")
    rng = np.random.default_rng(cfg.seed)
    X, labels = _make_dataset(cfg, rng)
    total = X.shape[0]
    d, H, W = cfg.d, cfg.H, cfg.W

    grid = make_pivots(cfg.Z, cfg.sigma)
    codes = encode_grid(W, H, cfg.alpha, grid)
    dim = d + codes.shape[0]

    plan = SpectralPlan(kind=cfg.pn.kind, path="eigen", params=cfg.pn) if cfg.spectral else None

    V = np.eye(d)
    Wc = 0.01 * rng.standard_normal((cfg.classes, dim * dim))
    bc = np.zeros(cfg.classes)
    opt_V, opt_W, opt_b = _RMSProp(V.shape), _RMSProp(Wc.shape), _RMSProp(bc.shape)

    onehot = np.zeros((total, cfg.classes))
    onehot[np.arange(total), labels] = 1.0

    losses: list[float] = []
    for epoch in range(cfg.epochs):
        gV = np.zeros_like(V)
        gW = np.zeros_like(Wc)
        gb = np.zeros_like(bc)
        loss_sum = 0.0
        for idx in range(total):
            x = X[idx]
            pre = V @ x
            rect = np.maximum(pre, 0.0)
            centered = center_columns(rect, cfg.pn.beta)
            aug = augment(FeatureBatch(Phi=centered), codes)
            M = cooc_matrix(aug)
            Psi = spectral_fwd(M, plan) if plan is not None else pn_fwd(M, cfg.pn)

            feats = Psi.reshape(-1)
            logits = Wc @ feats + bc
            logits -= np.max(logits)
            expl = np.exp(logits)
            probs = expl / np.sum(expl)
            loss_sum += -float(np.log(probs[labels[idx]] + 1e-300))

            dlogits = (probs - onehot[idx]) / total
            gW += np.outer(dlogits, feats)
            gb += dlogits
            dPsi = (Wc.T @ dlogits).reshape(dim, dim)
            if plan is not None:
                pg = spectral_pool(M, aug, dPsi, plan)
            else:
                pg = pn_bwd(cfg.pn.kind, M, aug, dPsi, cfg.pn)
            dpre = pg.dPhi * (pre > 0)
            gV += dpre @ x.T

        loss = loss_sum / total
        if not np.isfinite(loss):
            raise NumericError(f"loss diverged to non-finite value at epoch {epoch}")
        losses.append(loss)
        opt_V.step(V, gV, cfg.lr)
        opt_W.step(Wc, gW, cfg.lr)
        opt_b.step(bc, gb, cfg.lr)

    return {
        "kind": cfg.pn.kind,
        "spectral": cfg.spectral,
        "alpha": cfg.alpha,
        "classes": cfg.classes,
        "samples_per_class": cfg.samples_per_class,
        "epochs": cfg.epochs,
        "lr": cfg.lr,
        "seed": cfg.seed,
        "initial_loss": losses[0],
        "final_loss": losses[-1],
        "losses": losses,
    }
