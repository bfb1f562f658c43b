"""Perte biweight de Tukey"""
from typing import Optional, Tuple

import numpy as np

from app.core.errors import DimensionError

TUKEY_C = 4.685
MAD_TO_SIGMA = 1.4826


def mad_scale(residuals: np.ndarray) -> float:
    """σ = 1.4826 · MAD ; retombe à 1 quand tous les résidus sont identiques"""
    residuals = np.ravel(residuals)
    mad = np.median(np.abs(residuals - np.median(residuals)))
    sigma = MAD_TO_SIGMA * mad
    return float(sigma) if sigma > 0 else 1.0


def tukey_rho(r: np.ndarray, c: float = TUKEY_C) -> np.ndarray:
    """ρ(r) = c²/6 (1 − (1 − (r/c)²)³) si |r| ≤ c, c²/6 sinon"""
    u = np.minimum((r / c) ** 2, 1.0)
    return (c * c / 6.0) * (1.0 - (1.0 - u) ** 3)


def tukey_psi(r: np.ndarray, c: float = TUKEY_C) -> np.ndarray:
    """ρ'(r) = r (1 − (r/c)²)², exactement 0 pour |r| > c"""
    inside = np.abs(r) <= c
    return np.where(inside, r * (1.0 - (r / c) ** 2) ** 2, 0.0)


def tukey_biweight_loss(
    pred: np.ndarray,
    target: np.ndarray,
    sigma: Optional[float] = None,
    c: float = TUKEY_C,
) -> Tuple[float, np.ndarray]:
    """Perte moyenne sur toutes les coordonnées et gradient par rapport à `pred`

    Sans `sigma`, l'échelle est estimée par MAD sur le lot ; elle est traitée comme
    une constante dans le gradient.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError(f"formes incompatibles: {pred.shape} vs {target.shape}")
    residuals = pred - target
    if sigma is None:
        sigma = mad_scale(residuals)
    r = residuals / sigma
    loss = float(tukey_rho(r, c).mean())
    grad = tukey_psi(r, c) / (sigma * r.size)
    return loss, grad


def reference_scale(targets: np.ndarray) -> float:
    """Échelle fixe pour la validation : MAD des cibles autour de leur moyenne"""
    targets = np.asarray(targets, dtype=np.float64)
    spread = np.median(np.abs(targets - targets.mean(axis=0)))
    sigma = MAD_TO_SIGMA * spread
    return float(sigma) if sigma > 0 else 1.0
