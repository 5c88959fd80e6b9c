"""Exact expansions behind the at-least-one-success pooling rule."""

import math
from fractions import Fraction

import numpy as np
import pytest

from sopool.errors import ValidationError
from sopool.probmodel import (
    BernoulliPool,
    binom_at_least_one,
    multinom_at_least_one,
    simulate_cooc,
)


class TestPoolValidation:
    def test_trial_count_bounds(self):
        with pytest.raises(ValidationError):
            BernoulliPool(N=0, p=0.5)
        with pytest.raises(ValidationError):
            BernoulliPool(N=31, p=0.5)

    def test_probability_bounds(self):
        with pytest.raises(ValidationError):
            BernoulliPool(N=2, p=1.5)
        with pytest.raises(ValidationError):
            BernoulliPool(N=2, p=-0.1)

    def test_simplex_constraint(self):
        with pytest.raises(ValidationError):
            BernoulliPool(N=2, p=0.5, q=0.4, s=0.2)
        BernoulliPool(N=2, p=0.5, q=0.4, s=0.1)


class TestBinomial:
    def test_endpoints(self):
        assert binom_at_least_one(BernoulliPool(N=5, p=0.0)) == 0.0
        np.testing.assert_allclose(binom_at_least_one(BernoulliPool(N=5, p=1.0)), 1.0,
                                   atol=1e-15)

    def test_two_fair_trials(self):
        # 4 equally likely outcomes, 3 contain a success
        np.testing.assert_allclose(
            binom_at_least_one(BernoulliPool(N=2, p=0.5)), 0.75, atol=1e-15
        )

    def test_closed_form_identity(self):
        for N in range(1, 31):
            for p in np.linspace(0.0, 1.0, 101):
                got = binom_at_least_one(BernoulliPool(N=N, p=float(p)))
                assert abs(got - (1.0 - (1.0 - p) ** N)) <= 1e-12

    def test_monotone_in_p_and_N(self):
        vals = [binom_at_least_one(BernoulliPool(N=7, p=p)) for p in np.linspace(0.01, 0.99, 30)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        vals = [binom_at_least_one(BernoulliPool(N=N, p=0.3)) for N in range(1, 20)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_log_space_coefficients_match_exact_arithmetic(self):
        """Cross-check lgamma coefficients against exact rationals for N <= 12."""
        for N in range(1, 13):
            p = Fraction(3, 10)
            exact = 1 - (1 - p) ** N
            got = binom_at_least_one(BernoulliPool(N=N, p=float(p)))
            # also rebuild the sum from integer binomial coefficients
            rebuilt = sum(
                Fraction(math.comb(N, n)) * p**n * (1 - p) ** (N - n)
                for n in range(1, N + 1)
            )
            assert rebuilt == exact
            assert abs(got - float(exact)) <= 1e-13


class TestMultinomial:
    def test_known_value(self):
        got = multinom_at_least_one(BernoulliPool(N=3, p=0.2, q=0.3, s=0.1))
        np.testing.assert_allclose(got, 1.0 - 0.8**3, atol=1e-13)
        np.testing.assert_allclose(got, 0.488, atol=1e-13)

    def test_degenerates_to_binomial(self):
        for N in (1, 4, 9):
            for p in (0.0, 0.25, 0.8, 1.0):
                a = multinom_at_least_one(BernoulliPool(N=N, p=p))
                b = binom_at_least_one(BernoulliPool(N=N, p=p))
                assert abs(a - b) <= 1e-13

    def test_zero_joint_probability(self):
        assert multinom_at_least_one(BernoulliPool(N=4, p=0.0, q=0.5, s=0.3)) == 0.0

    def test_independent_of_solo_split(self):
        """The q/s split never moves the result: only p and N matter."""
        for N in (2, 7, 12):
            for p in (0.1, 0.4):
                target = 1.0 - (1.0 - p) ** N
                for q in np.linspace(0.0, 1.0 - p, 10):
                    for s in np.linspace(0.0, 1.0 - p - q, 10):
                        got = multinom_at_least_one(
                            BernoulliPool(N=N, p=p, q=float(q), s=float(s))
                        )
                        assert abs(got - target) <= 1e-10


class TestSimulate:
    def test_certain_and_impossible(self):
        assert simulate_cooc(BernoulliPool(N=3, p=1.0), trials=100, seed=1) == 1.0
        assert simulate_cooc(BernoulliPool(N=3, p=0.0), trials=100, seed=1) == 0.0

    def test_converges_to_closed_form(self):
        pool = BernoulliPool(N=5, p=0.3)
        trials = 1_000_000
        target = 1.0 - 0.7**5
        freq = simulate_cooc(pool, trials=trials, seed=7)
        sigma = math.sqrt(target * (1.0 - target) / trials)
        assert abs(freq - target) <= 3.0 * sigma

    def test_reproducible(self):
        pool = BernoulliPool(N=4, p=0.2)
        a = simulate_cooc(pool, trials=10_000, seed=42, shards=4)
        b = simulate_cooc(pool, trials=10_000, seed=42, shards=4)
        assert a == b

    def test_bad_trials_rejected(self):
        with pytest.raises(ValidationError):
            simulate_cooc(BernoulliPool(N=2, p=0.5), trials=0)
