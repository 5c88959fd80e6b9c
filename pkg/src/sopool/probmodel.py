"""Closed-form probabilistic oracles behind the MaxExp pooling rule.

A co-occurrence entry is modeled as N draws from a four-event model:
joint firing with probability p, each feature firing alone with q and s,
neither with 1-p-q-s. The probability of at least one joint event is
1-(1-p)^N however q and s are split, which is exactly the MaxExp forward;
the expansions here evaluate that identity the long way so it can serve
as an independent oracle:

    binom_at_least_one    sum_{n>=1} C(N,n) p^n (1-p)^(N-n)
    multinom_at_least_one sum over (n>=1, n', n'') of the multinomial pmf

Coefficients are computed in log space (lgamma) so N up to 30 stays exact
to ~1e-13 without overflow; tests cross-check them against exact integer
arithmetic for small N. simulate_cooc estimates the same probability by
Monte Carlo with per-shard generator seeds spawned deterministically from
the master seed, so the result is reproducible at any shard count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "BernoulliPool",
    "binom_at_least_one",
    "multinom_at_least_one",
    "simulate_cooc",
]

MAX_TRIALS = 30


@dataclass(frozen=True)
class BernoulliPool:
    N: int
    p: float
    q: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValidationError(f"trial count must be an integer >= 1, got {self.N!r}")
        if self.N > MAX_TRIALS:
            raise ValidationError(
                f"trial count must be <= {MAX_TRIALS} (coefficient overflow guard), got {self.N}"
            )
        for name, v in (("p", self.p), ("q", self.q), ("s", self.s)):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")
        if self.p + self.q + self.s > 1.0 + 1e-12:
            raise ValidationError(
                f"p + q + s must be <= 1, got {self.p + self.q + self.s}"
            )


def _log_multinom(N: int, parts: tuple[int, ...]) -> float:
    out = math.lgamma(N + 1)
    for k in parts:
        out -= math.lgamma(k + 1)
    return out


def _pow_term(base: float, exponent: int) -> float:
    # 0^0 = 1 by convention in the pmf expansion
    if exponent == 0:
        return 1.0
    return base**exponent


def binom_at_least_one(pool: BernoulliPool) -> float:
    """P(at least one success in N trials), evaluated as the binomial sum."""
    N, p = pool.N, pool.p
    total = 0.0
    for n in range(1, N + 1):
        coeff = math.exp(_log_multinom(N, (n, N - n)))
        total += coeff * _pow_term(p, n) * _pow_term(1.0 - p, N - n)
    return total


def multinom_at_least_one(pool: BernoulliPool) -> float:
    """P(at least one joint event) under the four-event model.

    Triple sum over n >= 1 joint events, n' and n'' solo events; the
    remainder N - n - n' - n'' is the nothing-fired count. Independent of
    how mass is split between q and s.
    """
    N, p, q, s = pool.N, pool.p, pool.q, pool.s
    rest = 1.0 - p - q - s
    total = 0.0
    for n in range(1, N + 1):
        for n1 in range(0, N - n + 1):
            for n2 in range(0, N - n - n1 + 1):
                n3 = N - n - n1 - n2
                coeff = math.exp(_log_multinom(N, (n, n1, n2, n3)))
                total += (
                    coeff
                    * _pow_term(p, n)
                    * _pow_term(q, n1)
                    * _pow_term(s, n2)
                    * _pow_term(rest, n3)
                )
    return total


def simulate_cooc(pool: BernoulliPool, trials: int, seed: int = 0, shards: int = 4) -> float:
    """Monte-Carlo frequency of >= 1 joint event in N draws.

    Work is split into shards with generator seeds spawned from the master
    seed, so the estimate is bit-identical for a fixed (seed, shards) pair
    regardless of how the shards are scheduled.
    """
    if trials < 1:
        raise ValidationError(f"trial count must be >= 1, got {trials}")
    shards = max(1, min(int(shards), trials))
    seqs = np.random.SeedSequence(seed).spawn(shards)
    base, extra = divmod(trials, shards)
    hits = 0
    for i, seq in enumerate(seqs):
        count = base + (1 if i < extra else 0)
        if count == 0:
            continue
        rng = np.random.default_rng(seq)
        draws = rng.random((count, pool.N))
        hits += int(np.count_nonzero(np.any(draws < pool.p, axis=1)))
    return hits / trials
