"""Régions de personnes : découpe, redimensionnement 120×80, normalisation"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image
from skimage.transform import resize

from app.core.errors import DatasetNotFoundError
from app.pose.skeleton import to_region
from app.scatternet.transform import GrayImage
from app.schemas.activity import ActivityLabel
from app.schemas.dataset import AnnotationRecord, Box

logger = logging.getLogger(__name__)

REGION_WIDTH = 120
REGION_HEIGHT = 80


def load_gray_png(path: Union[str, Path]) -> np.ndarray:
    """PNG 8 bits → intensités dans [0, 1]"""
    path = Path(path)
    if not path.exists():
        raise DatasetNotFoundError(f"image introuvable: {path}")
    with Image.open(path) as image:
        return np.asarray(image.convert("L"), dtype=np.float64) / 255.0


def save_gray_png(data: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = np.clip(np.round(np.asarray(data) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(pixels).save(path)
    return path


def pixel_box(box: Box, image_shape: Tuple[int, int]) -> Optional[Box]:
    """Boîte entière couvrant `box`, ou None si elle sort de l'image"""
    x, y, w, h = box
    rows, cols = image_shape
    tol = 1e-6
    if w <= 0 or h <= 0 or x < -tol or y < -tol or x + w > cols + tol or y + h > rows + tol:
        return None
    x0, y0 = int(np.floor(x + tol)), int(np.floor(y + tol))
    x1 = min(int(np.ceil(x + w - tol)), cols)
    y1 = min(int(np.ceil(y + h - tol)), rows)
    if x1 - x0 < 2 or y1 - y0 < 2:
        return None
    return float(x0), float(y0), float(x1 - x0), float(y1 - y0)


def crop_region(
    image: np.ndarray, box: Box, width: int = REGION_WIDTH, height: int = REGION_HEIGHT
) -> Optional[Tuple[GrayImage, Box]]:
    """Découper, redimensionner (bilinéaire, sans respect du ratio) et normaliser

    Renvoie la région et la boîte entière réellement découpée, ou None si la
    boîte sort de l'image.
    """
    cropped_box = pixel_box(box, image.shape)
    if cropped_box is None:
        return None
    x0, y0, w, h = (int(v) for v in cropped_box)
    patch = image[y0:y0 + h, x0:x0 + w]
    resized = resize(patch, (height, width), order=1, mode="edge", anti_aliasing=False, preserve_range=True)
    return GrayImage.from_array(resized, normalize=True), cropped_box


@dataclass(frozen=True, eq=False)
class RegionSet:
    """Régions découpées d'un jeu annoté, avec leur vérité terrain"""
    images: np.ndarray      # (N, 80, 120) normalisées
    keypoints: np.ndarray   # (N, 14, 2) en pixels de région
    labels: Tuple[ActivityLabel, ...]
    boxes: Tuple[Box, ...]
    record_index: Tuple[int, ...]
    persons_per_image: Tuple[int, ...]
    violent_per_image: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, indices: Sequence[int]) -> "RegionSet":
        idx = list(indices)
        return RegionSet(
            images=self.images[idx],
            keypoints=self.keypoints[idx],
            labels=tuple(self.labels[i] for i in idx),
            boxes=tuple(self.boxes[i] for i in idx),
            record_index=tuple(self.record_index[i] for i in idx),
            persons_per_image=tuple(self.persons_per_image[i] for i in idx),
            violent_per_image=tuple(self.violent_per_image[i] for i in idx),
        )


def extract_regions(
    records: Sequence[AnnotationRecord],
    root: Union[str, Path],
    width: int = REGION_WIDTH,
    height: int = REGION_HEIGHT,
) -> RegionSet:
    """Découper chaque personne annotée ; chemins d'images relatifs à `root`"""
    root = Path(root)
    images, keypoints, labels, boxes = [], [], [], []
    record_index, persons, violent = [], [], []
    for index, record in enumerate(records):
        if not record.persons:
            continue
        data = load_gray_png(root / record.image)
        for person in record.persons:
            result = crop_region(data, person.box, width, height)
            if result is None:
                logger.warning(f"⚠️ {record.image}: boîte {person.box} hors de l'image, ignorée")
                continue
            region, cropped_box = result
            images.append(region.data)
            keypoints.append(to_region(person.keypoints, cropped_box, width, height))
            labels.append(person.label)
            boxes.append(cropped_box)
            record_index.append(index)
            persons.append(len(record.persons))
            violent.append(record.violent_count)

    logger.info(f"📊 {len(labels)} régions extraites de {len(records)} images")
    return RegionSet(
        images=np.array(images).reshape(-1, height, width),
        keypoints=np.array(keypoints).reshape(-1, 14, 2),
        labels=tuple(labels),
        boxes=tuple(boxes),
        record_index=tuple(record_index),
        persons_per_image=tuple(persons),
        violent_per_image=tuple(violent),
    )
