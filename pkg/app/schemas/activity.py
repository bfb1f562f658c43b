"""Schémas pour la classification d'activité"""
from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, field_validator


class ActivityLabel(str, Enum):
    """Les six classes : cinq activités violentes et une neutre"""
    PUNCHING = "punching"
    STABBING = "stabbing"
    SHOOTING = "shooting"
    KICKING = "kicking"
    STRANGLING = "strangling"
    NEUTRAL = "neutral"

    @property
    def is_violent(self) -> bool:
        return self is not ActivityLabel.NEUTRAL


ALL_LABELS: Tuple[ActivityLabel, ...] = tuple(ActivityLabel)
VIOLENT_LABELS: Tuple[ActivityLabel, ...] = tuple(l for l in ActivityLabel if l.is_violent)


class SvmHyperparams(BaseModel):
    """Hyperparamètres du SVM à noyau gaussien"""
    model_config = ConfigDict(frozen=True)

    C: float = 14.0
    gamma: float = 2e-5
    kkt_tolerance: float = 1e-3
    solver_tolerance: float = 1e-7  # écart de violation maximale à la convergence
    max_iter: int = 1_000_000

    @field_validator('C')
    @classmethod
    def validate_c(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("C doit être strictement positif")
        return v

    @field_validator('gamma')
    @classmethod
    def validate_gamma(cls, v: float) -> float:
        if v < 0:
            raise ValueError("gamma doit être positif ou nul")
        return v

    @field_validator('kkt_tolerance', 'solver_tolerance')
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("la tolérance doit être strictement positive")
        return v
