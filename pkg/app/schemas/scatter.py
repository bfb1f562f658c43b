"""Schémas pour le front-end ScatterNet"""
from typing import Literal, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

# Orientations DTCWT, dans l'ordre des sous-bandes de dtcwt.Transform2d
ORIENTATIONS_DEG: Tuple[int, ...] = (15, 45, 75, 105, 135, 165)


class ScatterConfig(BaseModel):
    """Paramètres du ScatterNet à log paramétrique"""
    model_config = ConfigDict(frozen=True)

    num_scales: int = 2
    num_orientations: int = 6
    # k_j, un par échelle. Les cartes L1 valent log(U + k_j) − log(k_j) : décalées de
    # −log(k_j) pour qu'une enveloppe nulle (image constante) donne une carte nulle.
    log_offsets: Tuple[float, ...] = (1e-3, 1e-3)
    resolution_factors: Tuple[float, ...] = (1.0, 1.5, 2.0)
    joint_invariance_enabled: bool = True
    log_all_scales: bool = True  # False: log uniquement à j=1
    border_trim: int = 1

    @field_validator('num_scales')
    @classmethod
    def validate_num_scales(cls, v: int) -> int:
        if v < 1:
            raise ValueError("num_scales doit être >= 1")
        return v

    @field_validator('num_orientations')
    @classmethod
    def validate_num_orientations(cls, v: int) -> int:
        if v != len(ORIENTATIONS_DEG):
            raise ValueError("la DTCWT fournit exactement 6 orientations")
        return v

    @field_validator('resolution_factors')
    @classmethod
    def validate_resolution_factors(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("au moins un facteur de résolution est requis")
        if any(f < 1.0 for f in v):
            raise ValueError("chaque facteur de résolution doit être >= 1")
        return v

    @field_validator('border_trim')
    @classmethod
    def validate_border_trim(cls, v: int) -> int:
        if v < 0:
            raise ValueError("border_trim doit être >= 0")
        return v

    @model_validator(mode='after')
    def validate_log_offsets(self) -> 'ScatterConfig':
        if len(self.log_offsets) != self.num_scales:
            raise ValueError(
                f"log_offsets doit contenir {self.num_scales} valeurs (une par échelle)"
            )
        if any(k <= 0 for k in self.log_offsets):
            raise ValueError("chaque k_j doit être strictement positif")
        return self

    @property
    def averaging_scale(self) -> int:
        """Échelle de moyennage 2^J en pixels d'entrée"""
        return 2 ** self.num_scales

    @property
    def channels_per_resolution(self) -> int:
        """1 + J·6 + 6²·J(J−1)/2"""
        j = self.num_scales
        n = self.num_orientations
        return 1 + j * n + n * n * j * (j - 1) // 2

    @property
    def num_channels(self) -> int:
        return self.channels_per_resolution * len(self.resolution_factors)


class ChannelDescriptor(BaseModel):
    """Description d'un canal de ScatterFeatures"""
    model_config = ConfigDict(frozen=True)

    layer: Literal["L0", "L1", "L2"]
    resolution: float
    scales: Tuple[int, ...] = ()
    orientations: Tuple[int, ...] = ()  # en degrés
    rows: int
    cols: int
