"""Schémas pour le réseau de régression et les priors structurels"""
from typing import Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

NUM_KEYPOINTS = 14


class NetConfig(BaseModel):
    """Architecture du back-end : 4 convolutions (L3-L6) + 2 couches denses"""
    model_config = ConfigDict(frozen=True)

    conv_widths: Tuple[int, ...] = (32, 32, 64, 64)
    kernel_size: int = 3
    pool_after: Tuple[int, ...] = (0, 2)  # indices des convolutions suivies d'un max-pool (L3, L5)
    fc1_width: int = 512
    num_keypoints: int = NUM_KEYPOINTS
    # Normalisation locale inter-canaux
    lrn_size: int = 5
    lrn_alpha: float = 1e-4
    lrn_beta: float = 0.75
    lrn_k: float = 2.0

    @field_validator('conv_widths')
    @classmethod
    def validate_conv_widths(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(v) != 4 or any(w < 1 for w in v):
            raise ValueError("quatre largeurs de convolution positives sont requises (L3-L6)")
        return v

    @field_validator('kernel_size', 'lrn_size')
    @classmethod
    def validate_odd(cls, v: int) -> int:
        if v < 1 or v % 2 == 0:
            raise ValueError("la taille doit être impaire et positive")
        return v

    @field_validator('pool_after')
    @classmethod
    def validate_pool_after(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(i < 0 or i > 3 for i in v):
            raise ValueError("pool_after référence une convolution inexistante")
        return tuple(sorted(set(v)))

    @model_validator(mode='after')
    def validate_output(self) -> 'NetConfig':
        if self.num_keypoints != NUM_KEYPOINTS:
            raise ValueError("le réseau prédit exactement 14 points clés")
        return self

    @property
    def output_width(self) -> int:
        return 2 * self.num_keypoints

    @property
    def layer_ids(self) -> Tuple[str, ...]:
        return tuple(f"L{i + 3}" for i in range(len(self.conv_widths)))


class TrainConfig(BaseModel):
    """Hyperparamètres d'entraînement SGD"""
    model_config = ConfigDict(frozen=True)

    base_lr: float = 1e-5
    lr_after_drop: float = 1e-6
    drop_epoch: int = 20
    dropout_keep: float = 0.5
    batch_size: int = 20
    epochs: int = 90
    seed: int = 0

    @field_validator('base_lr', 'lr_after_drop')
    @classmethod
    def validate_lr(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("le taux d'apprentissage doit être positif")
        return v

    @field_validator('dropout_keep')
    @classmethod
    def validate_keep(cls, v: float) -> float:
        if not 0 < v <= 1:
            raise ValueError("dropout_keep doit être dans ]0, 1]")
        return v

    @field_validator('batch_size')
    @classmethod
    def validate_batch_size(cls, v: int) -> int:
        if v < 1:
            raise ValueError("batch_size doit être >= 1")
        return v

    @model_validator(mode='after')
    def validate_schedule(self) -> 'TrainConfig':
        if self.epochs < 0 or self.drop_epoch < 0:
            raise ValueError("epochs et drop_epoch doivent être positifs")
        if self.epochs > 0 and self.drop_epoch >= self.epochs:
            raise ValueError("drop_epoch doit être inférieur à epochs")
        return self

    def learning_rate(self, epoch: int) -> float:
        """Taux d'apprentissage de l'époque (0-indexée)"""
        return self.base_lr if epoch < self.drop_epoch else self.lr_after_drop


class PriorConfig(BaseModel):
    """Apprentissage des priors structurels (filtres PCA)"""
    model_config = ConfigDict(frozen=True)

    patch_rows: int = 3
    patch_cols: int = 3
    patches_per_layer: int = 10_000
    max_items: int = 500  # exemples propagés pour les couches L4-L6
    checkerboard_threshold: float = 0.5
    seed: int = 0

    @field_validator('patch_rows', 'patch_cols', 'patches_per_layer', 'max_items')
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("doit être >= 1")
        return v

    @field_validator('checkerboard_threshold')
    @classmethod
    def validate_threshold(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("le seuil doit être dans ]0, 1[")
        return v
