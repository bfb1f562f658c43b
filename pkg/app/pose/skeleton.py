"""Points clés, squelette et vecteur d'orientations des membres"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from app.core.errors import DecodingError, DimensionError
from app.schemas.dataset import Box
from app.schemas.network import NUM_KEYPOINTS

KEYPOINT_NAMES: Tuple[str, ...] = (
    "head", "neck",
    "right_shoulder", "right_elbow", "right_wrist",
    "left_shoulder", "left_elbow", "left_wrist",
    "right_hip", "right_knee", "right_ankle",
    "left_hip", "left_knee", "left_ankle",
)

# Segments (indices 0-based de P1..P14), orientés du premier au second point
EDGES: Tuple[Tuple[int, int], ...] = (
    (0, 1),    # P1-P2   tête-cou
    (1, 2),    # P2-P3
    (2, 3),    # P3-P4   bras droit
    (3, 4),    # P4-P5   avant-bras droit
    (5, 1),    # P6-P2   orienté vers la gauche de l'image
    (5, 6),    # P6-P7   bras gauche
    (6, 7),    # P7-P8   avant-bras gauche
    (2, 8),    # P3-P9   flanc droit
    (5, 11),   # P6-P12  flanc gauche
    (11, 8),   # P12-P9  bassin, orienté vers la gauche de l'image
    (8, 9),    # P9-P10  cuisse droite
    (9, 10),   # P10-P11 tibia droit
    (11, 12),  # P12-P13 cuisse gauche
    (12, 13),  # P13-P14 tibia gauche
)

# Paires de segments partageant une articulation (indices dans EDGES)
JOINT_PAIRS: Tuple[Tuple[int, int], ...] = (
    (1, 4),    # cou : épaule droite / épaule gauche
    (1, 2),    # épaule droite
    (7, 2),
    (4, 5),    # épaule gauche
    (8, 5),
    (7, 10),   # hanche droite
    (9, 10),
    (8, 12),   # hanche gauche
    (9, 12),
    (2, 3),    # coude droit
    (5, 6),    # coude gauche
    (10, 11),  # genou droit
    (12, 13),  # genou gauche
)

DEGENERATE_LENGTH = 1e-9


@dataclass(frozen=True, eq=False)
class KeypointSet:
    """P1..P14 en pixels (x, y), y vers le bas"""
    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.shape != (NUM_KEYPOINTS, 2):
            raise DimensionError(f"{NUM_KEYPOINTS} points (x, y) attendus, forme {points.shape}")
        if not np.all(np.isfinite(points)):
            raise DimensionError("coordonnées non finies")
        points = points.copy()
        points.flags.writeable = False
        object.__setattr__(self, "points", points)

    def as_dict(self) -> dict:
        return {name: tuple(p) for name, p in zip(KEYPOINT_NAMES, self.points)}


@dataclass(frozen=True, eq=False)
class Skeleton:
    keypoints: KeypointSet
    edges: Tuple[Tuple[int, int], ...] = EDGES

    @property
    def limb_vectors(self) -> np.ndarray:
        p = self.keypoints.points
        return np.array([p[b] - p[a] for a, b in self.edges])

    @property
    def degenerate(self) -> np.ndarray:
        """Masque des segments de longueur nulle"""
        return np.linalg.norm(self.limb_vectors, axis=1) < DEGENERATE_LENGTH


@dataclass(frozen=True, eq=False)
class AngleVector:
    """14 angles absolus (degrés, [0, 360)) suivis de 13 angles relatifs ([0, 180])"""
    values: np.ndarray
    degenerate: np.ndarray

    @property
    def absolute(self) -> np.ndarray:
        return self.values[:len(EDGES)]

    @property
    def relative(self) -> np.ndarray:
        return self.values[len(EDGES):]


def angle_vector_header() -> Tuple[str, ...]:
    """Ordre des colonnes du vecteur d'angles (convention y vers le haut)"""
    edge_names = [f"{KEYPOINT_NAMES[a]}>{KEYPOINT_NAMES[b]}" for a, b in EDGES]
    absolute = [f"abs:{name}" for name in edge_names]
    relative = [f"rel:{edge_names[e1]}|{edge_names[e2]}" for e1, e2 in JOINT_PAIRS]
    return tuple(absolute + relative)


ANGLE_VECTOR_LENGTH = len(EDGES) + len(JOINT_PAIRS)


def decode_keypoints(output: Sequence[float], region_w: float, region_h: float) -> KeypointSet:
    """Vecteur normalisé de 28 valeurs → points en pixels de la région (borné à la région)"""
    vector = np.asarray(output, dtype=np.float64).ravel()
    if vector.size != 2 * NUM_KEYPOINTS:
        raise DecodingError(f"{2 * NUM_KEYPOINTS} valeurs attendues, reçu {vector.size}")
    if not np.all(np.isfinite(vector)):
        raise DecodingError("sortie du réseau non finie")
    normalized = np.clip(vector, 0.0, 1.0).reshape(NUM_KEYPOINTS, 2)
    return KeypointSet(normalized * np.array([region_w, region_h]))


def encode_keypoints(keypoints: KeypointSet, region_w: float, region_h: float) -> np.ndarray:
    """Inverse de decode_keypoints : coordonnées divisées par la taille de la région"""
    return (keypoints.points / np.array([region_w, region_h])).ravel()


def to_region(points: np.ndarray, box: Box, region_w: float, region_h: float) -> np.ndarray:
    """Coordonnées image → coordonnées de la région redimensionnée"""
    x, y, w, h = box
    points = np.asarray(points, dtype=np.float64)
    return (points - np.array([x, y])) * np.array([region_w / w, region_h / h])


def to_image(points: np.ndarray, box: Box, region_w: float, region_h: float) -> np.ndarray:
    x, y, w, h = box
    points = np.asarray(points, dtype=np.float64)
    return points * np.array([w / region_w, h / region_h]) + np.array([x, y])


def build_skeleton(keypoints: KeypointSet) -> Skeleton:
    return Skeleton(keypoints=keypoints)


def orientation_vector(skeleton: Skeleton) -> AngleVector:
    vectors = skeleton.limb_vectors
    degenerate = skeleton.degenerate
    # y image vers le bas → y mathématique vers le haut
    absolute = np.degrees(np.arctan2(-vectors[:, 1], vectors[:, 0])) % 360.0
    absolute[(absolute >= 360.0) | degenerate] = 0.0

    relative = np.zeros(len(JOINT_PAIRS))
    for k, (e1, e2) in enumerate(JOINT_PAIRS):
        if degenerate[e1] or degenerate[e2]:
            continue
        difference = abs(absolute[e1] - absolute[e2]) % 360.0
        relative[k] = min(difference, 360.0 - difference)
    return AngleVector(values=np.concatenate([absolute, relative]), degenerate=degenerate)


def angle_features(points: np.ndarray) -> np.ndarray:
    """Raccourci : points (14, 2) → vecteur d'angles"""
    return orientation_vector(build_skeleton(KeypointSet(points))).values
