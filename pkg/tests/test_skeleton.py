import numpy as np
import pytest

from app.core.errors import DecodingError, DimensionError, ParameterError
from app.pose.metrics import BODY_PART_GROUPS, pck_at_d, pck_curve
from app.pose.skeleton import (
    ANGLE_VECTOR_LENGTH,
    EDGES,
    JOINT_PAIRS,
    KeypointSet,
    angle_features,
    angle_vector_header,
    build_skeleton,
    decode_keypoints,
    encode_keypoints,
    orientation_vector,
    to_image,
    to_region,
)


def standing_person():
    """Silhouette debout, bras le long du corps, en pixels de région"""
    return np.array([
        [60, 10], [60, 20],
        [50, 22], [48, 35], [47, 46],
        [70, 22], [72, 35], [73, 46],
        [54, 48], [54, 62], [54, 76],
        [66, 48], [66, 62], [66, 76],
    ], dtype=float)


def rotate_image_points(points, degrees, center=(60.0, 40.0)):
    """Rotation dans le sens trigonométrique pour un axe y vers le bas"""
    theta = np.radians(degrees)
    c, s = np.cos(theta), np.sin(theta)
    shifted = points - np.array(center)
    x, y = shifted[:, 0], shifted[:, 1]
    return np.stack([x * c + y * s, -x * s + y * c], axis=1) + np.array(center)


def circular_difference(a, b):
    d = np.abs(a - b) % 360.0
    return np.minimum(d, 360.0 - d)


class TestKeypointCodec:
    def test_decode_scales_to_region(self):
        keypoints = decode_keypoints(np.full(28, 0.5), 120, 80)
        np.testing.assert_array_equal(keypoints.points, np.tile([60.0, 40.0], (14, 1)))

    def test_decode_clamps(self):
        values = np.full(28, 0.5)
        values[0], values[1] = -0.3, 1.7
        keypoints = decode_keypoints(values, 120, 80)
        assert tuple(keypoints.points[0]) == (0.0, 80.0)

    def test_decode_encode_round_trip(self, rng):
        values = rng.uniform(0, 1, size=28)
        np.testing.assert_allclose(encode_keypoints(decode_keypoints(values, 120, 80), 120, 80), values)

    def test_decode_wrong_size(self):
        with pytest.raises(DecodingError):
            decode_keypoints(np.zeros(27), 120, 80)

    def test_decode_non_finite(self):
        values = np.zeros(28)
        values[4] = np.nan
        with pytest.raises(DecodingError):
            decode_keypoints(values, 120, 80)

    def test_keypoint_set_shape(self):
        with pytest.raises(DimensionError):
            KeypointSet(np.zeros((13, 2)))

    def test_region_image_mapping(self, rng):
        points = rng.uniform(0, 100, size=(14, 2))
        box = (30.0, 12.0, 60.0, 40.0)
        np.testing.assert_allclose(to_image(to_region(points, box, 120, 80), box, 120, 80), points)


class TestSkeleton:
    def test_fourteen_edges(self):
        assert len(EDGES) == 14
        assert len(JOINT_PAIRS) == 13
        assert ANGLE_VECTOR_LENGTH == 27
        assert len(angle_vector_header()) == 27

    def test_upward_limb_is_ninety_degrees(self):
        points = standing_person()
        # segment tête → cou de (0, 0) à (0, -5) : vers le haut de l'image
        points[0], points[1] = [0.0, 0.0], [0.0, -5.0]
        angles = angle_features(points)
        assert angles[0] == pytest.approx(90.0)

    def test_ranges(self, rng):
        for _ in range(20):
            angles = angle_features(rng.uniform(0, 120, size=(14, 2)))
            assert angles.shape == (27,)
            assert np.all((angles[:14] >= 0) & (angles[:14] < 360))
            assert np.all((angles[14:] >= 0) & (angles[14:] <= 180))

    def test_degenerate_limb(self):
        points = standing_person()
        points[4] = points[3]
        vector = orientation_vector(build_skeleton(KeypointSet(points)))
        assert vector.degenerate[3]
        assert vector.absolute[3] == 0.0
        assert vector.relative[JOINT_PAIRS.index((2, 3))] == 0.0
        assert np.all(np.isfinite(vector.values))

    def test_translation_and_scale_invariance(self):
        points = standing_person()
        base = angle_features(points)
        np.testing.assert_allclose(angle_features(points + np.array([17.0, -4.0])), base, atol=1e-9)
        np.testing.assert_allclose(angle_features(points * 2.5), base, atol=1e-9)

    def test_rotation_shifts_absolute_angles(self):
        points = standing_person()
        base = angle_features(points)
        rotated = angle_features(rotate_image_points(points, 30.0))
        assert np.max(circular_difference(rotated[:14], base[:14] + 30.0)) < 1e-6
        np.testing.assert_allclose(rotated[14:], base[14:], atol=1e-6)


class TestPck:
    def test_exact_prediction(self):
        truth = KeypointSet(standing_person())
        _, fraction = pck_at_d(truth, truth, 0.0)
        assert fraction == 1.0

    def test_distance_threshold(self):
        truth = standing_person()
        pred = truth.copy()
        pred[:7, 0] += 5.0
        pred[7:, 0] += 6.0
        hits, fraction = pck_at_d(KeypointSet(pred), KeypointSet(truth), 5.0)
        assert hits[:7].all() and not hits[7:].any()
        assert fraction == 0.5

    def test_negative_d(self):
        truth = KeypointSet(standing_person())
        with pytest.raises(ParameterError):
            pck_at_d(truth, truth, -1.0)

    def test_curve_monotone(self, rng):
        truths = rng.uniform(0, 100, size=(12, 14, 2))
        preds = truths + rng.normal(scale=4.0, size=truths.shape)
        curve = pck_curve(preds, truths, [float(d) for d in range(16)])
        assert np.all(np.diff(curve.per_keypoint, axis=0) >= 0)
        assert np.all(np.diff(curve.mean) >= 0)

    def test_curve_rows_layout(self, rng):
        truths = rng.uniform(0, 100, size=(3, 14, 2))
        curve = pck_curve(truths, truths, [0.0, 5.0])
        assert len(curve.rows()[0]) == len(curve.header())
        assert curve.group(BODY_PART_GROUPS["wrists"])[0] == 1.0

    def test_curve_shape_mismatch(self):
        with pytest.raises(ParameterError):
            pck_curve(np.zeros((2, 14, 2)), np.zeros((3, 14, 2)), [1.0])
