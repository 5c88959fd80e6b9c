"""Rectification, centering, augmentation, and the co-occurrence matrix."""

import numpy as np
import pytest

from sopool.aggregate import (
    AugmentedBatch,
    FeatureBatch,
    augment,
    center_columns,
    cooc_matrix,
    rectify_center,
    trace_normalize,
)
from sopool.errors import DimensionError, NumericError, ValidationError


def _aug(Phi, codes=None):
    batch = FeatureBatch(Phi=np.asarray(Phi, dtype=np.float64))
    if codes is None:
        codes = np.zeros((0, batch.N))
    return augment(batch, codes)


class TestFeatureBatch:
    def test_empty_batch_rejected(self):
        with pytest.raises(ValidationError):
            FeatureBatch(Phi=np.zeros((3, 0)))

    def test_non_matrix_rejected(self):
        with pytest.raises(DimensionError):
            FeatureBatch(Phi=np.zeros(4))

    def test_nan_rejected(self):
        Phi = np.ones((2, 2))
        Phi[0, 0] = np.inf
        with pytest.raises(NumericError):
            FeatureBatch(Phi=Phi)

    def test_grid_multiple_enforced(self):
        with pytest.raises(DimensionError):
            FeatureBatch(Phi=np.ones((2, 7)), grid=(2, 2))
        FeatureBatch(Phi=np.ones((2, 8)), grid=(2, 2))  # two patches, fine


class TestRectifyCenter:
    def test_beta_zero_pure_rectification(self):
        rng = np.random.default_rng(0)
        batch = FeatureBatch(Phi=rng.standard_normal((4, 9)))
        out = rectify_center(batch, 0.0)
        assert np.all(out.Phi >= 0)
        np.testing.assert_array_equal(out.Phi, np.maximum(batch.Phi, 0.0))

    def test_beta_one_zero_means(self):
        rng = np.random.default_rng(1)
        batch = FeatureBatch(Phi=rng.standard_normal((5, 12)))
        out = rectify_center(batch, 1.0)
        np.testing.assert_allclose(np.mean(out.Phi, axis=1), 0.0, atol=1e-12)

    def test_all_negative_collapses_to_zero(self):
        batch = FeatureBatch(Phi=-np.abs(np.random.default_rng(2).standard_normal((3, 6))) - 0.1)
        for beta in (0.0, 0.4, 1.0):
            out = rectify_center(batch, beta)
            np.testing.assert_array_equal(out.Phi, np.zeros((3, 6)))

    def test_bad_beta_rejected(self):
        batch = FeatureBatch(Phi=np.ones((2, 2)))
        with pytest.raises(ValidationError):
            rectify_center(batch, -0.1)
        with pytest.raises(ValidationError):
            rectify_center(batch, 1.5)

    def test_center_columns_standalone(self):
        Phi = np.array([[1.0, 3.0], [0.0, 4.0]])
        out = center_columns(Phi, 0.5)
        np.testing.assert_allclose(out, [[0.0, 2.0], [-1.0, 3.0]], atol=1e-15)


class TestAugment:
    def test_zero_codes_zero_rows(self):
        aug = _aug(np.ones((3, 5)), np.zeros((4, 5)))
        np.testing.assert_array_equal(aug.PhiBar[3:], np.zeros((4, 5)))

    def test_single_column_stacking(self):
        aug = _aug(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]))
        np.testing.assert_array_equal(aug.PhiBar[:, 0], [1.0, 0.0, 0.0, 1.0])

    def test_round_trip_split(self):
        rng = np.random.default_rng(3)
        Phi = rng.standard_normal((4, 7))
        codes = rng.standard_normal((6, 7))
        aug = _aug(Phi, codes)
        np.testing.assert_array_equal(aug.Phi, Phi)
        np.testing.assert_array_equal(aug.C, codes)
        assert aug.d == 4 and aug.Zp == 6 and aug.N == 7

    def test_column_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            _aug(np.ones((3, 5)), np.zeros((2, 4)))


class TestCoocMatrix:
    def test_single_basis_vector(self):
        M = cooc_matrix(_aug(np.array([[1.0], [0.0]])))
        np.testing.assert_array_equal(M.M, [[1.0, 0.0], [0.0, 0.0]])
        assert M.traceval == 1.0

    def test_two_orthonormal_columns(self):
        M = cooc_matrix(_aug(np.array([[1.0, 0.0], [0.0, 1.0]])))
        np.testing.assert_allclose(M.M, 0.5 * np.eye(2), atol=1e-15)
        np.testing.assert_allclose(M.traceval, 1.0, atol=1e-15)

    def test_random_batch_psd_symmetric(self):
        rng = np.random.default_rng(4)
        M = cooc_matrix(_aug(rng.standard_normal((8, 50))))
        assert np.linalg.norm(M.M - M.M.T) == 0.0
        assert np.min(np.linalg.eigvalsh(M.M)) >= -1e-10

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        Phi = rng.standard_normal((4, 9))
        codes = rng.standard_normal((2, 9))
        perm = rng.permutation(9)
        a = cooc_matrix(_aug(Phi, codes)).M
        b = cooc_matrix(_aug(Phi[:, perm], codes[:, perm])).M
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_quadratic_scaling(self):
        # power-of-two scale keeps the comparison bit-exact
        rng = np.random.default_rng(6)
        Phi = rng.standard_normal((3, 11))
        a = cooc_matrix(_aug(2.0 * Phi)).M
        b = cooc_matrix(_aug(Phi)).M
        np.testing.assert_array_equal(a, 4.0 * b)

    def test_trace_is_mean_squared_column_norm(self):
        rng = np.random.default_rng(7)
        Phi = rng.standard_normal((5, 13))
        M = cooc_matrix(_aug(Phi))
        expected = float(np.mean(np.sum(Phi * Phi, axis=0)))
        assert abs(M.traceval - expected) <= 1e-12 * abs(expected)

    def test_sign_structure_by_beta(self):
        rng = np.random.default_rng(8)
        raw = FeatureBatch(Phi=rng.standard_normal((6, 40)))
        nonneg = cooc_matrix(_aug(rectify_center(raw, 0.0).Phi)).M
        assert np.all(nonneg >= 0)
        centered = cooc_matrix(_aug(rectify_center(raw, 1.0).Phi)).M
        assert np.any(centered < 0)  # negative evidence appears


class TestTraceNormalize:
    def test_identity_matrix(self):
        out = trace_normalize(np.eye(4), lam=1e-12)
        np.testing.assert_allclose(out, np.eye(4) / 4.0, atol=1e-12)

    def test_zero_matrix_guarded(self):
        out = trace_normalize(np.zeros((3, 3)), lam=1e-6)
        np.testing.assert_array_equal(out, np.zeros((3, 3)))
        assert np.all(np.isfinite(out))

    def test_rank_one_trace(self):
        v = np.array([0.6, 0.8])  # unit norm
        lam = 1e-3
        out = trace_normalize(np.outer(v, v), lam=lam)
        np.testing.assert_allclose(np.trace(out), 1.0 / (1.0 + lam), atol=1e-14)

    def test_scale_invariance(self):
        rng = np.random.default_rng(9)
        Phi = rng.standard_normal((4, 10))
        M = cooc_matrix(_aug(Phi))
        a = trace_normalize(M, lam=1e-14)
        b = trace_normalize(cooc_matrix(_aug(5.0 * Phi)), lam=1e-14)
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_entry_ranges_for_rectified_input(self):
        rng = np.random.default_rng(10)
        M = cooc_matrix(_aug(np.maximum(rng.standard_normal((5, 30)), 0.0)))
        out = trace_normalize(M)
        assert np.all(np.diag(out) <= 1.0)
        assert np.all(out >= -1.0) and np.all(out <= 1.0)

    def test_bad_lambda_rejected(self):
        with pytest.raises(ValidationError):
            trace_normalize(np.eye(2), lam=0.0)

    def test_accepts_cooc_wrapper(self):
        M = cooc_matrix(_aug(np.eye(3)))
        a = trace_normalize(M)
        b = trace_normalize(M.M)
        np.testing.assert_allclose(a, b, atol=1e-15)
