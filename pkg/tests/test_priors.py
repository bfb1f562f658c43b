import numpy as np
import pytest

from app.core.errors import ConfigurationError, DimensionError, ParameterError
from app.priors.assemble import assemble_priors
from app.priors.pca import (
    PatchMatrix,
    detect_checkerboard,
    learn_pca_filters,
    load_priors,
    orthonormality_error,
    reconstruction_error,
    sample_patches,
    save_priors,
)
from app.schemas.network import NetConfig, PriorConfig


def random_patches(rng, dimension=18, count=60, channels=2):
    columns = rng.normal(size=(dimension, count))
    return PatchMatrix(columns=columns, patch_rows=3, patch_cols=3, channels=channels)


class TestSamplePatches:
    def test_shape(self, rng):
        stack = rng.normal(size=(4, 147, 18, 28))
        patches = sample_patches(stack, 3, 3, 500)
        assert patches.columns.shape == (3 * 3 * 147, 500)

    def test_constant_maps_give_zero_columns(self):
        patches = sample_patches(np.full((2, 5, 10, 10), 4.0), 3, 3, 50)
        np.testing.assert_array_equal(patches.columns, 0.0)

    def test_seed_determinism(self, rng):
        stack = rng.normal(size=(3, 4, 12, 12))
        a = sample_patches(stack, 3, 3, 100, seed=5)
        b = sample_patches(stack, 3, 3, 100, seed=5)
        np.testing.assert_array_equal(a.columns, b.columns)

    def test_patch_larger_than_map(self, rng):
        with pytest.raises(DimensionError):
            sample_patches(rng.normal(size=(1, 2, 2, 2)), 3, 3, 10)


class TestLearnPcaFilters:
    def test_rank_one(self, rng):
        v = rng.normal(size=18)
        columns = np.outer(v, rng.normal(size=40))
        X = PatchMatrix(columns=columns, patch_rows=3, patch_cols=3, channels=2)
        prior = learn_pca_filters(X, 1)
        np.testing.assert_allclose(np.abs(prior.filters[0]), np.abs(v / np.linalg.norm(v)), atol=1e-10)

    def test_rank_deficiency_is_a_notice(self, rng):
        columns = np.outer(rng.normal(size=18), rng.normal(size=40))
        X = PatchMatrix(columns=columns, patch_rows=3, patch_cols=3, channels=2)
        prior = learn_pca_filters(X, 4)
        assert prior.rank_deficient
        assert prior.K == 1

    def test_reconstruction_matches_discarded_eigenvalues(self, rng):
        for _ in range(10):
            X = random_patches(rng)
            K = int(rng.integers(1, 10))
            prior = learn_pca_filters(X, K)
            full = np.sort(np.linalg.eigvalsh(X.columns @ X.columns.T))[::-1]
            discarded = full[K:].sum()
            scale = np.sum(X.columns ** 2)
            assert abs(reconstruction_error(X, prior.filters) - discarded) < 1e-6 * scale
            assert orthonormality_error(prior) < 1e-6

    def test_projector_idempotent(self, rng):
        X = random_patches(rng)
        V = learn_pca_filters(X, 5).filters
        P = V.T @ V
        assert np.linalg.norm(P @ P @ X.columns - P @ X.columns) < 1e-8

    def test_sign_convention(self, rng):
        prior = learn_pca_filters(random_patches(rng), 6)
        for vector in prior.filters:
            assert vector[np.argmax(np.abs(vector))] > 0

    def test_k_out_of_range(self, rng):
        with pytest.raises(ParameterError):
            learn_pca_filters(random_patches(rng), 0)


class TestCheckerboard:
    def test_alternating_pattern(self):
        grid = np.array([[1, -1, 1], [-1, 1, -1], [1, -1, 1]], dtype=float)
        assert detect_checkerboard(grid)

    def test_gaussian_blob(self):
        yy, xx = np.mgrid[-1:2, -1:2]
        assert not detect_checkerboard(np.exp(-(xx ** 2 + yy ** 2)))

    def test_derivative_of_gaussian(self):
        yy, xx = np.mgrid[-1:2, -1:2]
        assert not detect_checkerboard(-xx * np.exp(-(xx ** 2 + yy ** 2) / 2.0))


class TestAssemblePriors:
    def test_requested_sizes(self, rng):
        features = rng.normal(size=(6, 5, 12, 16))
        config = NetConfig(conv_widths=(3, 3, 4, 4), fc1_width=8)
        priors = assemble_priors(features, config, PriorConfig(patches_per_layer=400, max_items=4))
        assert [priors[k].K for k in ("L3", "L4", "L5", "L6")] == [3, 3, 4, 4]
        for prior in priors.values():
            assert orthonormality_error(prior) < 1e-6

    def test_deterministic(self, rng):
        features = rng.normal(size=(4, 3, 10, 10))
        config = NetConfig(conv_widths=(2, 2, 2, 2), fc1_width=4)
        prior_config = PriorConfig(patches_per_layer=200, max_items=4, seed=2)
        a = assemble_priors(features, config, prior_config)
        b = assemble_priors(features, config, prior_config)
        for layer_id in a:
            np.testing.assert_array_equal(a[layer_id].filters, b[layer_id].filters)

    def test_patch_size_must_match_kernels(self, rng):
        with pytest.raises(ConfigurationError):
            assemble_priors(rng.normal(size=(2, 3, 10, 10)), NetConfig(), PriorConfig(patch_rows=5, patch_cols=5))

    def test_save_load(self, rng, tmp_path):
        features = rng.normal(size=(4, 3, 10, 10))
        config = NetConfig(conv_widths=(2, 2, 2, 2), fc1_width=4)
        priors = assemble_priors(features, config, PriorConfig(patches_per_layer=200, max_items=4))
        save_priors(priors, tmp_path)
        loaded = load_priors(tmp_path)
        assert sorted(loaded) == ["L3", "L4", "L5", "L6"]
        np.testing.assert_allclose(loaded["L4"].filters, priors["L4"].filters, atol=1e-6)
