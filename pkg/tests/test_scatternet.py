import numpy as np
import pytest
import pywt
from scipy.stats import skew

from app.core.errors import DimensionError, ParameterError
from app.scatternet.transform import (
    GrayImage,
    calibrate_log_offsets,
    complex_modulus,
    dtcwt_forward,
    dtcwt_inverse,
    export_features,
    first_layer_envelopes,
    joint_invariance,
    load_features,
    local_average,
    parametric_log,
    scatter,
    second_layer,
    ComplexSubband,
)
from app.schemas.scatter import ScatterConfig


def relative_change(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(a)


def smooth_image(rng, shape=(80, 120)):
    """Image aléatoire lissée : contenu basse fréquence comme une région réelle"""
    from scipy import ndimage
    return ndimage.gaussian_filter(rng.normal(size=shape), sigma=2.0)


class TestFilterBank:
    def test_level1_lengths(self, bank):
        assert len(bank.level1_lowpass) == 13
        assert len(bank.level1_highpass) == 19

    def test_lowpass_dc_gain(self, bank):
        # dtcwt normalise les filtres passe-bas à un gain continu de 1 par arbre
        assert abs(bank.level1_lowpass.sum() - 1.0) < 1e-6

    def test_deterministic(self, bank):
        from app.scatternet.filters import build_filter_bank
        other = build_filter_bank.__wrapped__()
        np.testing.assert_array_equal(bank.qshift_highpass[0], other.qshift_highpass[0])

    def test_filters_read_only(self, bank):
        with pytest.raises(ValueError):
            bank.level1_lowpass[0] = 0.0


class TestDtcwt:
    def test_round_trip(self, bank, rng):
        for _ in range(10):
            image = rng.normal(size=(64, 64))
            rebuilt = dtcwt_inverse(dtcwt_forward(image, bank, 3), bank)
            assert relative_change(image, rebuilt) < 1e-3

    def test_six_orientations_per_level(self, bank, rng):
        pyramid = dtcwt_forward(rng.normal(size=(32, 32)), bank, 2)
        assert len(pyramid.levels) == 2
        assert all(len(level) == 6 for level in pyramid.levels)

    def test_constant_image_has_no_detail(self, bank):
        pyramid = dtcwt_forward(np.full((32, 32), 3.0), bank, 2)
        for level in pyramid.levels:
            for subband in level:
                assert np.max(complex_modulus(subband)) < 1e-8

    def test_too_many_levels(self, bank):
        with pytest.raises(DimensionError):
            dtcwt_forward(np.zeros((16, 16)), bank, 4)

    def test_shift_tolerance_beats_real_dwt(self, bank, rng):
        image = smooth_image(rng, (64, 64))
        shifted = np.roll(image, 1, axis=1)

        def dtcwt_energy(data):
            return np.stack([complex_modulus(sb) for sb in dtcwt_forward(data, bank, 2).levels[1]])

        def dwt_energy(data):
            _, (h, v, d) = pywt.wavedec2(data, "db2", level=2, mode="periodization")[:2]
            return np.abs(np.stack([h, v, d]))

        complex_change = relative_change(dtcwt_energy(image), dtcwt_energy(shifted))
        real_change = relative_change(dwt_energy(image), dwt_energy(shifted))
        assert complex_change < real_change


class TestModulusAndLog:
    def test_pythagorean_triple(self):
        subband = ComplexSubband(1, 15, np.array([[3.0]]), np.array([[4.0]]))
        assert complex_modulus(subband)[0, 0] == 5.0

    def test_log_of_zero_with_unit_offset(self):
        np.testing.assert_array_equal(parametric_log(np.zeros((4, 4)), 1.0), 0.0)

    def test_log_rejects_non_positive_offset(self):
        with pytest.raises(ParameterError):
            parametric_log(np.ones(3), 0.0)

    def test_log_reduces_skewness(self, rng):
        envelope = rng.lognormal(size=5000)
        assert abs(skew(parametric_log(envelope, 0.1))) < abs(skew(envelope))


class TestLocalAverage:
    def test_constant_preserved(self):
        np.testing.assert_allclose(local_average(np.full((20, 20), 2.5), 4), 2.5)

    def test_mass_preserved(self):
        impulse = np.zeros((41, 41))
        impulse[20, 20] = 1.0
        assert abs(local_average(impulse, 2).sum() - 1.0) < 1e-6

    def test_stride(self):
        assert local_average(np.ones((40, 60)), 4, stride=4).shape == (10, 15)


class TestScatter:
    def test_channel_count_and_grid(self, bank, rng):
        features = scatter(GrayImage(smooth_image(rng)), bank)
        assert features.num_channels == 147
        assert features.as_tensor().shape == (147, 18, 28)

    def test_second_layer_path_count(self, bank, rng):
        first = first_layer_envelopes(smooth_image(rng), bank, 2)
        assert len(second_layer(first, bank, ScatterConfig())) == 36

    def test_constant_image_only_l0(self, bank):
        features = scatter(GrayImage(np.full((80, 120), 0.7)), bank, ScatterConfig(resolution_factors=(1.0,)))
        for channel, grid in zip(features.channels, features.maps):
            if channel.layer == "L0":
                assert np.all(np.abs(grid) > 0)
            else:
                assert np.max(np.abs(grid)) < 1e-6

    def test_l1_shifted_by_log_offset(self, bank):
        # sans le décalage −log(k_j), les cartes L1 vaudraient log(0.5) et log(2.0)
        config = ScatterConfig(resolution_factors=(1.0,), log_offsets=(0.5, 2.0), joint_invariance_enabled=False)
        features = scatter(GrayImage(np.full((80, 120), 0.7)), bank, config)
        l1 = [grid for channel, grid in zip(features.channels, features.maps) if channel.layer == "L1"]
        assert len(l1) == 12
        assert max(np.max(np.abs(grid)) for grid in l1) < 1e-6

    def test_translation_tolerance(self, bank, rng):
        config = ScatterConfig(resolution_factors=(1.0,))
        image = smooth_image(rng, (84, 124))
        base = scatter(GrayImage.from_array(image[2:82, 2:122]), bank, config).as_tensor()
        moved = scatter(GrayImage.from_array(image[2:82, 0:120]), bank, config).as_tensor()
        assert relative_change(base, moved) < 0.1

    def test_too_small_image(self, bank):
        with pytest.raises(DimensionError):
            GrayImage(np.zeros((8, 8)))


class TestJointInvariance:
    def test_orientation_constant_unchanged(self, bank, rng):
        features = scatter(
            GrayImage(smooth_image(rng)), bank,
            ScatterConfig(resolution_factors=(1.0,), joint_invariance_enabled=False),
        )
        maps = np.array(features.maps)
        # remplacer chaque carte L1/L2 par une valeur ne dépendant que de l'échelle
        for i, channel in enumerate(features.channels):
            if channel.layer != "L0":
                maps[i] = float(sum(channel.scales))
        constant = features.with_maps(maps)
        smoothed = joint_invariance(constant)
        l2 = [i for i, ch in enumerate(features.channels) if ch.layer == "L2"]
        np.testing.assert_allclose(smoothed.maps[l2], constant.maps[l2], atol=1e-10)

    def test_channel_count_unchanged(self, bank, rng):
        features = scatter(
            GrayImage(smooth_image(rng)), bank,
            ScatterConfig(resolution_factors=(1.0,), joint_invariance_enabled=False),
        )
        assert joint_invariance(features).num_channels == features.num_channels

    def test_l1_scales_stay_distinct(self, bank, rng):
        features = scatter(
            GrayImage(smooth_image(rng)), bank,
            ScatterConfig(resolution_factors=(1.0,), joint_invariance_enabled=False),
        )
        smoothed = joint_invariance(features)
        l1 = {
            (ch.scales[0], ch.orientations[0]): smoothed.maps[i]
            for i, ch in enumerate(smoothed.channels) if ch.layer == "L1"
        }
        orientations = sorted({o for _, o in l1})
        assert len(orientations) == 6
        for orientation in orientations:
            assert not np.allclose(l1[(1, orientation)], l1[(2, orientation)])

    def test_rotation_pair_distance_shrinks(self, bank, rng):
        from skimage.transform import rotate
        config = ScatterConfig(resolution_factors=(1.0,), joint_invariance_enabled=False)
        image = smooth_image(rng, (80, 80))
        rotated = rotate(image, 30, mode="reflect")
        a = scatter(GrayImage(image), bank, config)
        b = scatter(GrayImage(rotated), bank, config)
        before = np.linalg.norm(a.as_tensor() - b.as_tensor())
        after = np.linalg.norm(joint_invariance(a).as_tensor() - joint_invariance(b).as_tensor())
        assert after < before


class TestCalibrationAndExport:
    def test_offsets_positive(self, bank, rng):
        images = [GrayImage(smooth_image(rng)) for _ in range(3)]
        offsets = calibrate_log_offsets(images, bank, ScatterConfig())
        assert len(offsets) == 2
        assert all(k > 0 for k in offsets)

    def test_export_round_trip(self, bank, rng, tmp_path):
        features = scatter(GrayImage(smooth_image(rng)), bank, ScatterConfig(resolution_factors=(1.0,)))
        export_features(features, tmp_path / "features")
        loaded = load_features(tmp_path / "features")
        assert loaded.channels == features.channels
        np.testing.assert_allclose(loaded.maps, features.maps, rtol=1e-6, atol=1e-6)


@pytest.mark.slow
def test_round_trip_hundred_images(bank):
    rng = np.random.default_rng(1)
    errors = [
        relative_change(image, dtcwt_inverse(dtcwt_forward(image, bank, 3), bank))
        for image in (rng.normal(size=(64, 64)) for _ in range(100))
    ]
    assert max(errors) < 1e-3
