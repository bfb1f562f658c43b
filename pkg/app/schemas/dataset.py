"""Schémas pour les annotations et le générateur synthétique"""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.schemas.activity import ActivityLabel
from app.schemas.network import NUM_KEYPOINTS

CAPTURE_HEIGHTS_M: Tuple[int, ...] = (2, 4, 6, 8)

Box = Tuple[float, float, float, float]  # x, y, w, h en pixels image
Point = Tuple[float, float]


def _validate_box(box: Box) -> Box:
    x, y, w, h = box
    if w <= 0 or h <= 0:
        raise ValueError("la boîte doit avoir une largeur et une hauteur positives")
    if x < 0 or y < 0:
        raise ValueError("la boîte doit être dans l'image")
    return box


class PersonAnnotation(BaseModel):
    """Une personne annotée : boîte, 14 points clés, activité"""
    model_config = ConfigDict(extra='forbid')

    box: Box
    keypoints: List[Point]
    label: ActivityLabel

    @field_validator('box')
    @classmethod
    def validate_box(cls, v: Box) -> Box:
        return _validate_box(v)

    @field_validator('keypoints')
    @classmethod
    def validate_keypoints(cls, v: List[Point]) -> List[Point]:
        if len(v) != NUM_KEYPOINTS:
            raise ValueError(f"{NUM_KEYPOINTS} points clés attendus, {len(v)} reçus")
        if any(x < 0 or y < 0 for x, y in v):
            raise ValueError("les points clés doivent être dans l'image")
        return v

    @model_validator(mode='after')
    def validate_box_contains_keypoints(self) -> 'PersonAnnotation':
        x, y, w, h = self.box
        tol = 1e-6
        for i, (px, py) in enumerate(self.keypoints):
            if not (x - tol <= px <= x + w + tol and y - tol <= py <= y + h + tol):
                raise ValueError(f"le point clé P{i + 1} est hors de la boîte")
        return self


class AnnotationRecord(BaseModel):
    """Une image annotée (une ligne JSONL)"""
    model_config = ConfigDict(extra='forbid')

    image: str
    height_m: Optional[int] = None
    persons: List[PersonAnnotation] = []

    @field_validator('height_m')
    @classmethod
    def validate_height(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v not in CAPTURE_HEIGHTS_M:
            raise ValueError(f"hauteur de capture inconnue: {v} (attendu {CAPTURE_HEIGHTS_M})")
        return v

    @property
    def violent_count(self) -> int:
        """Nombre de personnes violentes dans l'image"""
        return sum(1 for p in self.persons if p.label.is_violent)


class SyntheticConfig(BaseModel):
    """Paramètres du générateur de scènes synthétiques"""
    model_config = ConfigDict(frozen=True)

    persons_per_image: Tuple[int, int] = (2, 10)
    heights_m: Tuple[int, ...] = CAPTURE_HEIGHTS_M
    height_scales: Dict[int, float] = {2: 1.0, 4: 0.7, 6: 0.5, 8: 0.35}
    base_height_px: float = 100.0
    cell_size: Tuple[int, int] = (160, 176)  # largeur, hauteur d'une case de la scène
    grid: Tuple[int, int] = (5, 2)  # colonnes, lignes
    blur_sigma: Tuple[float, float] = (0.0, 1.2)
    brightness: Tuple[float, float] = (-0.1, 0.1)
    contrast: Tuple[float, float] = (0.8, 1.2)
    rotation_deg: Tuple[float, float] = (-10.0, 10.0)
    angle_jitter_deg: float = 6.0
    violent_fraction: float = 0.48
    seed: int = 0

    @field_validator('persons_per_image')
    @classmethod
    def validate_persons(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        lo, hi = v
        if lo > hi:
            raise ValueError("intervalle de personnes vide")
        if lo < 2 or hi > 10:
            raise ValueError("le nombre de personnes par image doit rester dans [2, 10]")
        return v

    @field_validator('blur_sigma', 'brightness', 'contrast', 'rotation_deg')
    @classmethod
    def validate_range(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if v[0] > v[1]:
            raise ValueError("intervalle vide")
        return v

    @field_validator('violent_fraction')
    @classmethod
    def validate_fraction(cls, v: float) -> float:
        if not 0 <= v <= 1:
            raise ValueError("violent_fraction doit être dans [0, 1]")
        return v

    @model_validator(mode='after')
    def validate_layout(self) -> 'SyntheticConfig':
        if not self.heights_m:
            raise ValueError("au moins une hauteur de capture est requise")
        missing = [h for h in self.heights_m if h not in self.height_scales]
        if missing:
            raise ValueError(f"facteur d'échelle manquant pour les hauteurs {missing}")
        if self.grid[0] * self.grid[1] < self.persons_per_image[1]:
            raise ValueError("la grille de la scène est trop petite pour le nombre de personnes")
        return self

    @property
    def scene_size(self) -> Tuple[int, int]:
        """Largeur, hauteur de la scène en pixels"""
        return self.cell_size[0] * self.grid[0], self.cell_size[1] * self.grid[1]


class DetectionStubRecord(BaseModel):
    """Sortie du détecteur remplacée par un fichier de boîtes"""
    image: str
    boxes: List[Box] = []


class PersonResult(BaseModel):
    box: Box
    keypoints: List[Point]
    label: ActivityLabel
    violent: bool


class InferenceResult(BaseModel):
    """Résultat d'inférence pour une image"""
    image: str
    persons: List[PersonResult] = []
    skipped_boxes: List[Box] = []
