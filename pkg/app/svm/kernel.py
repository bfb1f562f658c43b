"""Noyau gaussien"""
import numpy as np
from scipy.spatial.distance import cdist

from app.core.errors import DimensionError, ParameterError


def gaussian_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> float:
    """exp(−gamma·||a − b||²)"""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"vecteurs de longueurs différentes: {a.size} et {b.size}")
    if gamma < 0:
        raise ParameterError("gamma doit être positif ou nul")
    return float(np.exp(-gamma * np.sum((a - b) ** 2)))


def gram_matrix(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """Matrice K[i, j] = exp(−gamma·||A_i − B_j||²)"""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"dimensions incompatibles: {A.shape[1]} et {B.shape[1]}")
    if gamma < 0:
        raise ParameterError("gamma doit être positif ou nul")
    return np.exp(-gamma * cdist(A, B, "sqeuclidean"))
