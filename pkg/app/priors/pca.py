"""Filtres PCA : échantillonnage de patchs, vecteurs propres de XXᵀ, détection des damiers"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np
from scipy.linalg import eigh
from skimage.util import view_as_windows

from app.core.errors import DatasetNotFoundError, DimensionError, ParameterError
from app.utils.serializers import read_array_bundle, write_array_bundle

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PatchMatrix:
    """Patchs vectorisés dans l'ordre (canal, ligne, colonne), un par colonne, moyenne retirée"""
    columns: np.ndarray
    patch_rows: int
    patch_cols: int
    channels: int

    def __post_init__(self):
        expected = self.patch_rows * self.patch_cols * self.channels
        if self.columns.ndim != 2 or self.columns.shape[0] != expected:
            raise DimensionError(f"matrice de patchs {self.columns.shape}, dimension attendue {expected}")

    @property
    def dimension(self) -> int:
        return self.columns.shape[0]

    @property
    def count(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True, eq=False)
class PriorFilterSet:
    """Filtres orthonormés d'une couche de convolution

    `filters` contient K vecteurs unitaires (lignes) ; `kernels` les remet au format
    (K, c, z1, z2) et `weights` les met à l'échelle d'une initialisation de He.
    """
    layer_id: str
    filters: np.ndarray
    patch_rows: int
    patch_cols: int
    channels: int
    rejected_count: int = 0
    shortfall: int = 0
    rank_deficient: bool = False
    eigenvalues: np.ndarray = None

    @property
    def K(self) -> int:
        return self.filters.shape[0]

    @property
    def kernels(self) -> np.ndarray:
        return self.filters.reshape(self.K, self.channels, self.patch_rows, self.patch_cols)

    @property
    def weights(self) -> np.ndarray:
        # Vecteur unitaire de dimension fan_in : RMS 1/√fan_in ; He : RMS √(2/fan_in)
        return np.sqrt(2.0) * self.kernels


def sample_patches(features: np.ndarray, z1: int, z2: int, count: int, seed: int = 0) -> PatchMatrix:
    """Tirer `count` patchs z1×z2 (tous canaux) à des positions uniformes"""
    stack = np.asarray(features)
    if stack.ndim == 3:
        stack = stack[None]
    if stack.ndim != 4:
        raise DimensionError(f"pile de cartes 3D ou 4D attendue, reçu {stack.ndim} dimensions")
    if count < 1:
        raise ParameterError("au moins un patch est requis")
    items, channels, rows, cols = stack.shape
    if rows < z1 or cols < z2:
        raise DimensionError(f"cartes {rows}×{cols} plus petites que le patch {z1}×{z2}")

    rng = np.random.default_rng(seed)
    item_idx = rng.integers(items, size=count)
    row_idx = rng.integers(rows - z1 + 1, size=count)
    col_idx = rng.integers(cols - z2 + 1, size=count)

    windows = view_as_windows(np.ascontiguousarray(stack), (1, channels, z1, z2))
    patches = np.asarray(windows[item_idx, 0, row_idx, col_idx, 0], dtype=np.float64)
    patches = patches.reshape(count, channels * z1 * z2)
    patches -= patches.mean(axis=1, keepdims=True)
    return PatchMatrix(columns=patches.T.copy(), patch_rows=z1, patch_cols=z2, channels=channels)


def _sign_convention(vectors: np.ndarray) -> np.ndarray:
    """Rend positive l'entrée de plus grand module de chaque vecteur (lignes)"""
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(len(vectors)), idx])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def learn_pca_filters(X: PatchMatrix, K: int, layer_id: str = "L3", log_notice: bool = True) -> PriorFilterSet:
    """K premiers vecteurs propres de XXᵀ, valeurs propres décroissantes"""
    if K < 1 or K > X.dimension:
        raise ParameterError(f"K={K} hors de [1, {X.dimension}]")
    covariance = X.columns @ X.columns.T
    eigenvalues, eigenvectors = eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order].T

    tolerance = max(eigenvalues[0], 0.0) * X.dimension * np.finfo(float).eps
    rank = int(np.sum(eigenvalues > tolerance))
    rank_deficient = K > rank
    kept = min(K, rank) if rank > 0 else 0
    if rank_deficient and log_notice:
        logger.warning(f"⚠️ {layer_id}: rang {rank} < K={K}, seulement {kept} filtres renvoyés")

    return PriorFilterSet(
        layer_id=layer_id,
        filters=_sign_convention(eigenvectors[:kept]),
        patch_rows=X.patch_rows,
        patch_cols=X.patch_cols,
        channels=X.channels,
        rank_deficient=rank_deficient,
        eigenvalues=eigenvalues[:kept],
    )


def detect_checkerboard(filter_grid: np.ndarray, threshold: float = 0.5) -> bool:
    """Vrai si la part d'énergie spectrale dans le quadrant haute fréquence dépasse `threshold`

    Le quadrant haute fréquence regroupe les fréquences |fy| >= 1/4 et |fx| >= 1/4
    (cycles par échantillon) ; l'énergie est sommée sur les canaux.
    """
    grid = np.asarray(filter_grid, dtype=np.float64)
    if grid.ndim == 2:
        grid = grid[None]
    power = np.abs(np.fft.fft2(grid, axes=(-2, -1))) ** 2
    total = power.sum()
    if total <= 0:
        raise ParameterError("filtre nul")
    fy = np.abs(np.fft.fftfreq(grid.shape[-2]))[:, None]
    fx = np.abs(np.fft.fftfreq(grid.shape[-1]))[None, :]
    high = (fy >= 0.25) & (fx >= 0.25)
    return bool(power[:, high].sum() / total > threshold)


def orthonormality_error(prior: PriorFilterSet) -> float:
    """max |VVᵀ − I|"""
    gram = prior.filters @ prior.filters.T
    return float(np.max(np.abs(gram - np.eye(prior.K)))) if prior.K else 0.0


def reconstruction_error(X: PatchMatrix, filters: np.ndarray) -> float:
    """||X − VᵀVX||²_F pour des filtres en lignes"""
    projected = filters.T @ (filters @ X.columns)
    return float(np.sum((X.columns - projected) ** 2))


def save_priors(priors: Mapping[str, PriorFilterSet], directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    for layer_id, prior in priors.items():
        header = {
            "kind": "prior_filter_set",
            "layer_id": layer_id,
            "K": prior.K,
            "z1": prior.patch_rows,
            "z2": prior.patch_cols,
            "c": prior.channels,
            "rejected_count": prior.rejected_count,
            "shortfall": prior.shortfall,
        }
        write_array_bundle(directory / layer_id, {"filters": prior.filters}, header=header)
    logger.info(f"💾 Priors écrits dans {directory}")
    return directory


def load_priors(directory: Union[str, Path]) -> Dict[str, PriorFilterSet]:
    directory = Path(directory)
    headers = sorted(directory.glob("L*.json"))
    if not headers:
        raise DatasetNotFoundError(f"aucun prior dans {directory}")
    priors = {}
    for path in headers:
        arrays, header = read_array_bundle(path.with_suffix(""))
        priors[header["layer_id"]] = PriorFilterSet(
            layer_id=header["layer_id"],
            filters=arrays["filters"],
            patch_rows=header["z1"],
            patch_cols=header["z2"],
            channels=header["c"],
            rejected_count=header["rejected_count"],
            shortfall=header.get("shortfall", 0),
        )
    return priors
