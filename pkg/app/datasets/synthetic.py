"""Générateur de scènes synthétiques : silhouettes filaires par activité

Les poses sont décrites dans un repère corporel (y vers le haut, unité = hauteur
du corps, origine au milieu des hanches) par l'angle absolu de chaque membre.
Chaque activité a un gabarit d'angles moyens ; un bruit gaussien borné à ±2σ est
ajouté membre par membre. Le rendu place directement les points transformés
(échelle, rotation, translation) : la vérité terrain suit exactement la géométrie.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import ndimage
from skimage.draw import disk, line_aa, polygon

from app.core.errors import ParameterError
from app.datasets.regions import save_gray_png
from app.pose.skeleton import EDGES, KeypointSet
from app.scatternet.transform import GrayImage
from app.schemas.activity import VIOLENT_LABELS, ActivityLabel
from app.schemas.dataset import AnnotationRecord, PersonAnnotation, SyntheticConfig

logger = logging.getLogger(__name__)

# Longueurs des segments (fraction de la hauteur du corps)
LIMB_LENGTHS: Dict[str, float] = {
    "torso": 0.30,
    "head": 0.13,
    "shoulder": 0.11,
    "hip": 0.07,
    "upper_arm": 0.17,
    "forearm": 0.15,
    "thigh": 0.24,
    "shin": 0.23,
}
LENGTH_JITTER = 0.05  # ±5 % par segment
SHOULDER_SLOPE_DEG = 25.0

# Angles absolus moyens (degrés, y vers le haut) : tronc, tête, bras droit/gauche, jambes
POSE_TEMPLATES: Dict[ActivityLabel, Dict[str, float]] = {
    ActivityLabel.NEUTRAL: {
        "torso": 90, "head": 90,
        "r_upper": 265, "r_fore": 265, "l_upper": 275, "l_fore": 275,
        "r_thigh": 265, "r_shin": 268, "l_thigh": 275, "l_shin": 272,
    },
    # bras droit tendu latéralement, bras gauche en garde
    ActivityLabel.PUNCHING: {
        "torso": 95, "head": 95,
        "r_upper": 180, "r_fore": 180, "l_upper": 240, "l_fore": 120,
        "r_thigh": 255, "r_shin": 265, "l_thigh": 285, "l_shin": 275,
    },
    # coude droit levé, main redescendant
    ActivityLabel.STABBING: {
        "torso": 95, "head": 90,
        "r_upper": 135, "r_fore": 225, "l_upper": 285, "l_fore": 275,
        "r_thigh": 260, "r_shin": 265, "l_thigh": 280, "l_shin": 275,
    },
    # deux bras tendus à l'horizontale
    ActivityLabel.SHOOTING: {
        "torso": 90, "head": 90,
        "r_upper": 180, "r_fore": 180, "l_upper": 190, "l_fore": 175,
        "r_thigh": 265, "r_shin": 268, "l_thigh": 280, "l_shin": 275,
    },
    # jambe droite levée au-dessus de la hanche
    ActivityLabel.KICKING: {
        "torso": 80, "head": 85,
        "r_upper": 215, "r_fore": 200, "l_upper": 310, "l_fore": 320,
        "r_thigh": 160, "r_shin": 170, "l_thigh": 272, "l_shin": 270,
    },
    # deux bras levés vers l'avant
    ActivityLabel.STRANGLING: {
        "torso": 95, "head": 95,
        "r_upper": 150, "r_fore": 170, "l_upper": 170, "l_fore": 150,
        "r_thigh": 260, "r_shin": 265, "l_thigh": 280, "l_shin": 275,
    },
}

BACKGROUND_LEVEL = (0.15, 0.45)
FIGURE_INTENSITY = 0.9
HEAD_RADIUS = 0.06   # fraction de la hauteur du corps
LIMB_WIDTH = 0.03
JOINT_RADIUS = 1.5   # pixels


@dataclass(frozen=True, eq=False)
class ActivityPose:
    """14 points dans le repère corporel (y vers le haut)"""
    label: ActivityLabel
    points: np.ndarray


@dataclass(frozen=True, eq=False)
class RenderedFigure:
    region: GrayImage
    truth: KeypointSet
    label: ActivityLabel


def _direction(angle_deg: float) -> np.ndarray:
    theta = np.radians(angle_deg)
    return np.array([np.cos(theta), np.sin(theta)])


def sample_activity_pose(label: ActivityLabel, rng: np.random.Generator, jitter_deg: float = 6.0) -> ActivityPose:
    """Tirer une pose du gabarit de l'activité (jitter_deg = 0 : gabarit exact)"""
    label = ActivityLabel(label)
    template = POSE_TEMPLATES[label]
    angles = {}
    for name, mean in template.items():
        noise = rng.normal(0.0, jitter_deg) if jitter_deg > 0 else 0.0
        angles[name] = mean + float(np.clip(noise, -2 * jitter_deg, 2 * jitter_deg))
    lengths = {
        name: base * (1.0 + (rng.uniform(-LENGTH_JITTER, LENGTH_JITTER) if jitter_deg > 0 else 0.0))
        for name, base in LIMB_LENGTHS.items()
    }

    torso = angles["torso"]
    hip_mid = np.zeros(2)
    neck = hip_mid + lengths["torso"] * _direction(torso)
    head = neck + lengths["head"] * _direction(angles["head"])
    r_shoulder = neck + lengths["shoulder"] * _direction(torso + 90 + SHOULDER_SLOPE_DEG)
    l_shoulder = neck + lengths["shoulder"] * _direction(torso - 90 - SHOULDER_SLOPE_DEG)
    r_elbow = r_shoulder + lengths["upper_arm"] * _direction(angles["r_upper"])
    r_wrist = r_elbow + lengths["forearm"] * _direction(angles["r_fore"])
    l_elbow = l_shoulder + lengths["upper_arm"] * _direction(angles["l_upper"])
    l_wrist = l_elbow + lengths["forearm"] * _direction(angles["l_fore"])
    r_hip = hip_mid + lengths["hip"] * _direction(torso + 90)
    l_hip = hip_mid + lengths["hip"] * _direction(torso - 90)
    r_knee = r_hip + lengths["thigh"] * _direction(angles["r_thigh"])
    r_ankle = r_knee + lengths["shin"] * _direction(angles["r_shin"])
    l_knee = l_hip + lengths["thigh"] * _direction(angles["l_thigh"])
    l_ankle = l_knee + lengths["shin"] * _direction(angles["l_shin"])

    points = np.array([
        head, neck,
        r_shoulder, r_elbow, r_wrist,
        l_shoulder, l_elbow, l_wrist,
        r_hip, r_knee, r_ankle,
        l_hip, l_knee, l_ankle,
    ])
    return ActivityPose(label=label, points=points)


def place_pose(pose: ActivityPose, scale: float, rotation_deg: float, center: Tuple[float, float]) -> np.ndarray:
    """Repère corporel → pixels image (y vers le bas), centré sur `center`"""
    theta = np.radians(rotation_deg)
    rotation = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    body = pose.points - (pose.points.min(axis=0) + pose.points.max(axis=0)) / 2
    rotated = scale * body @ rotation.T
    return np.column_stack([center[0] + rotated[:, 0], center[1] - rotated[:, 1]])


def figure_extent(points: np.ndarray, scale: float) -> Tuple[np.ndarray, np.ndarray]:
    """Coins (min, max) de la silhouette dessinée, tête et épaisseur comprises"""
    margin = HEAD_RADIUS * scale + max(LIMB_WIDTH * scale, 2.0) + 1.0
    return points.min(axis=0) - margin, points.max(axis=0) + margin


def textured_background(shape: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Texture lissée et dégradé de luminosité (ombre douce)"""
    rows, cols = shape
    texture = ndimage.gaussian_filter(rng.normal(size=shape), sigma=3.0)
    texture /= max(np.abs(texture).max(), 1e-12)
    angle = rng.uniform(0, 2 * np.pi)
    yy, xx = np.mgrid[0:rows, 0:cols]
    ramp = (np.cos(angle) * xx / max(cols, 1) + np.sin(angle) * yy / max(rows, 1))
    ramp = (ramp - ramp.min()) / max(np.ptp(ramp), 1e-12)
    lo, hi = BACKGROUND_LEVEL
    mid = (lo + hi) / 2
    return np.clip(mid + 0.05 * texture + 0.1 * (ramp - 0.5), lo, hi)


def _stamp(canvas: np.ndarray, rr: np.ndarray, cc: np.ndarray, values) -> None:
    rows, cols = canvas.shape
    keep = (rr >= 0) & (rr < rows) & (cc >= 0) & (cc < cols)
    values = np.broadcast_to(values, rr.shape)
    canvas[rr[keep], cc[keep]] = np.maximum(canvas[rr[keep], cc[keep]], values[keep])


def draw_figure(canvas: np.ndarray, points: np.ndarray, scale: float, intensity: float = FIGURE_INTENSITY) -> None:
    """Dessiner les segments (anticrénelés), les articulations et la tête en place"""
    width = max(LIMB_WIDTH * scale, 1.0)
    for a, b in EDGES:
        (x0, y0), (x1, y1) = points[a], points[b]
        rr, cc, val = line_aa(int(round(y0)), int(round(x0)), int(round(y1)), int(round(x1)))
        _stamp(canvas, rr, cc, val * intensity)
        direction = np.array([x1 - x0, y1 - y0])
        norm = np.linalg.norm(direction)
        if norm > 1e-9:
            nx, ny = -direction[1] / norm * width / 2, direction[0] / norm * width / 2
            rr, cc = polygon(
                [y0 + ny, y1 + ny, y1 - ny, y0 - ny],
                [x0 + nx, x1 + nx, x1 - nx, x0 - nx],
            )
            _stamp(canvas, rr, cc, intensity)
    for x, y in points:
        rr, cc = disk((y, x), JOINT_RADIUS)
        _stamp(canvas, rr, cc, intensity)
    head_x, head_y = points[0]
    rr, cc = disk((head_y, head_x), max(HEAD_RADIUS * scale, JOINT_RADIUS))
    _stamp(canvas, rr, cc, intensity)


def apply_appearance(canvas: np.ndarray, config: SyntheticConfig, rng: np.random.Generator) -> np.ndarray:
    """Flou gaussien puis luminosité/contraste tirés dans les plages de la config"""
    sigma = rng.uniform(*config.blur_sigma)
    brightness = rng.uniform(*config.brightness)
    contrast = rng.uniform(*config.contrast)
    if sigma > 0:
        canvas = ndimage.gaussian_filter(canvas, sigma)
    return np.clip((canvas - 0.5) * contrast + 0.5 + brightness, 0.0, 1.0)


def render_stick_figure(
    pose: ActivityPose,
    config: SyntheticConfig,
    rng: np.random.Generator,
    scale: Optional[float] = None,
) -> RenderedFigure:
    """Rendre une personne seule dans sa région ; points renvoyés en pixels de la région

    `scale` (pixels par hauteur de corps) est tiré parmi les hauteurs de capture s'il
    n'est pas fourni.
    """
    if scale is None:
        height_m = int(rng.choice(config.heights_m))
        scale = config.base_height_px * config.height_scales[height_m]
    rotation = rng.uniform(*config.rotation_deg)

    points = place_pose(pose, scale, rotation, (0.0, 0.0))
    lo, hi = figure_extent(points, scale)
    origin = np.floor(lo)
    size = np.ceil(hi - origin).astype(int)
    points = points - origin
    shape = (max(int(size[1]), 16), max(int(size[0]), 16))

    canvas = textured_background(shape, rng)
    draw_figure(canvas, points, scale)
    canvas = apply_appearance(canvas, config, rng)
    return RenderedFigure(
        region=GrayImage.from_array(canvas, normalize=False),
        truth=KeypointSet(points),
        label=pose.label,
    )


def sample_label(config: SyntheticConfig, rng: np.random.Generator) -> ActivityLabel:
    if rng.uniform() < config.violent_fraction:
        return VIOLENT_LABELS[int(rng.integers(len(VIOLENT_LABELS)))]
    return ActivityLabel.NEUTRAL


def _render_scene(index: int, config: SyntheticConfig) -> Tuple[np.ndarray, AnnotationRecord]:
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, index]))
    height_m = int(rng.choice(config.heights_m))
    scale = config.base_height_px * config.height_scales[height_m]
    scene_w, scene_h = config.scene_size
    cell_w, cell_h = config.cell_size
    cols, rows = config.grid

    count = int(rng.integers(config.persons_per_image[0], config.persons_per_image[1] + 1))
    cells = rng.choice(cols * rows, size=count, replace=False)

    canvas = textured_background((scene_h, scene_w), rng)
    persons: List[PersonAnnotation] = []
    for cell in sorted(int(c) for c in cells):
        label = sample_label(config, rng)
        pose = sample_activity_pose(label, rng, config.angle_jitter_deg)
        rotation = rng.uniform(*config.rotation_deg)
        points = place_pose(pose, scale, rotation, (0.0, 0.0))
        lo, hi = figure_extent(points, scale)
        extent = hi - lo
        cell_x, cell_y = (cell % cols) * cell_w, (cell // cols) * cell_h
        # placement aléatoire dans la case, la silhouette reste dans la case
        slack = np.maximum(np.array([cell_w, cell_h]) - extent, 0.0)
        offset = np.array([cell_x, cell_y]) + rng.uniform(0, 1, size=2) * slack - lo
        points = points + offset
        draw_figure(canvas, points, scale)

        box_lo = np.maximum(lo + offset, [cell_x, cell_y])
        box_hi = np.minimum(hi + offset, [cell_x + cell_w, cell_y + cell_h])
        box = (float(box_lo[0]), float(box_lo[1]), float(box_hi[0] - box_lo[0]), float(box_hi[1] - box_lo[1]))
        persons.append(PersonAnnotation(
            box=box,
            keypoints=[(float(x), float(y)) for x, y in points],
            label=label,
        ))

    canvas = apply_appearance(canvas, config, rng)
    record = AnnotationRecord(image=f"images/{index:05d}.png", height_m=height_m, persons=persons)
    return canvas, record


def generate_dataset(
    config: SyntheticConfig, size: int, output_dir: Optional[Union[str, Path]] = None
) -> List[AnnotationRecord]:
    """Générer `size` scènes ; écrit les PNG sous output_dir/images si fourni

    Chaque scène a son propre flux aléatoire dérivé de (seed, indice) : le résultat
    ne dépend pas de l'ordre de génération.
    """
    if size < 1:
        raise ParameterError("size doit être >= 1")
    output_dir = Path(output_dir) if output_dir is not None else None
    records = []
    for index in range(size):
        canvas, record = _render_scene(index, config)
        if output_dir is not None:
            save_gray_png(canvas, output_dir / record.image)
        records.append(record)

    persons = [p for r in records for p in r.persons]
    violent = sum(1 for p in persons if p.label.is_violent)
    logger.info(
        f"✅ {size} scènes générées, {len(persons)} personnes dont {violent} violentes "
        f"({violent / max(len(persons), 1):.1%})"
    )
    return records
