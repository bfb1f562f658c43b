"""Apprentissage hiérarchique des priors L3-L6"""
import logging
from typing import Dict, Optional

import numpy as np

from app.core.errors import ConfigurationError, TrainingError
from app.network.model import RegressionNet, create_net, forward_to_layer
from app.priors.pca import PatchMatrix, PriorFilterSet, detect_checkerboard, learn_pca_filters, sample_patches
from app.schemas.network import NetConfig, PriorConfig

logger = logging.getLogger(__name__)

MAX_FILL_ATTEMPTS = 1000


def _orthogonal_fill(
    accepted: np.ndarray, missing: int, shape: tuple, threshold: float, rng: np.random.Generator
) -> np.ndarray:
    """Compléments orthogonaux aléatoires unitaires, sans damier"""
    basis = [v for v in accepted]
    dimension = int(np.prod(shape))
    attempts = 0
    added = []
    while len(added) < missing:
        attempts += 1
        if attempts > MAX_FILL_ATTEMPTS:
            raise TrainingError("impossible de compléter les priors sans damier")
        candidate = rng.normal(size=dimension)
        for _ in range(2):
            for vector in basis:
                candidate -= (vector @ candidate) * vector
        norm = np.linalg.norm(candidate)
        if norm < 1e-8:
            continue
        candidate /= norm
        if detect_checkerboard(candidate.reshape(shape), threshold):
            continue
        basis.append(candidate)
        added.append(candidate)
    return np.array(added)


def select_filters(
    X: PatchMatrix, K: int, layer_id: str, threshold: float, rng: np.random.Generator
) -> PriorFilterSet:
    """Vecteurs propres dans l'ordre, en écartant les damiers ; complète si nécessaire"""
    spectrum = learn_pca_filters(X, X.dimension, layer_id, log_notice=False)
    shape = (X.channels, X.patch_rows, X.patch_cols)

    accepted = []
    rejected = 0
    for vector in spectrum.filters:
        if len(accepted) == K:
            break
        if detect_checkerboard(vector.reshape(shape), threshold):
            rejected += 1
            continue
        accepted.append(vector)

    accepted = np.array(accepted).reshape(-1, X.dimension)
    shortfall = K - len(accepted)
    if shortfall > 0:
        logger.warning(f"⚠️ {layer_id}: {shortfall} filtres manquants, complétés par des vecteurs orthogonaux")
        accepted = np.vstack([accepted, _orthogonal_fill(accepted, shortfall, shape, threshold, rng)])

    return PriorFilterSet(
        layer_id=layer_id,
        filters=accepted,
        patch_rows=X.patch_rows,
        patch_cols=X.patch_cols,
        channels=X.channels,
        rejected_count=rejected,
        shortfall=shortfall,
        rank_deficient=spectrum.K < K,
    )


def _install(net: RegressionNet, prior: PriorFilterSet) -> RegressionNet:
    params = dict(net.params)
    params[f"{prior.layer_id}.weight"] = prior.weights
    params[f"{prior.layer_id}.bias"] = np.zeros(prior.K)
    return net.replace(params, init_mode="structural_prior")


def _propagate(net: RegressionNet, features: np.ndarray, layer_index: int, chunk: int = 32) -> np.ndarray:
    return np.concatenate([
        forward_to_layer(net, features[i:i + chunk], layer_index) for i in range(0, len(features), chunk)
    ])


def assemble_priors(
    scatter_features: np.ndarray,
    net_config: Optional[NetConfig] = None,
    prior_config: Optional[PriorConfig] = None,
) -> Dict[str, PriorFilterSet]:
    """L3 sur les cartes ScatterNet, puis chaque couche sur les sorties de la précédente

    Les sorties de la couche n sont calculées avec les priors de la couche n déjà installés.
    """
    net_config = net_config or NetConfig()
    prior_config = prior_config or PriorConfig()
    if (prior_config.patch_rows, prior_config.patch_cols) != (net_config.kernel_size, net_config.kernel_size):
        raise ConfigurationError(
            f"patchs {prior_config.patch_rows}×{prior_config.patch_cols} incompatibles "
            f"avec les noyaux {net_config.kernel_size}×{net_config.kernel_size}"
        )
    features = np.asarray(scatter_features)
    if features.ndim != 4 or len(features) == 0:
        raise ConfigurationError("pile (exemples, canaux, lignes, colonnes) non vide attendue")

    rng = np.random.default_rng(prior_config.seed)
    subset = features[np.sort(rng.permutation(len(features))[:prior_config.max_items])]
    net = create_net(net_config, features.shape[1], features.shape[2:], seed=prior_config.seed)

    priors: Dict[str, PriorFilterSet] = {}
    for index, (layer_id, width) in enumerate(zip(net_config.layer_ids, net_config.conv_widths)):
        stack = features if index == 0 else _propagate(net, subset, index - 1)
        patches = sample_patches(
            stack, prior_config.patch_rows, prior_config.patch_cols,
            prior_config.patches_per_layer, seed=prior_config.seed + index,
        )
        prior = select_filters(patches, width, layer_id, prior_config.checkerboard_threshold, rng)
        logger.info(
            f"📊 {layer_id}: {prior.K} filtres, {prior.rejected_count} damiers rejetés"
            + (f", {prior.shortfall} complétés" if prior.shortfall else "")
        )
        priors[layer_id] = prior
        net = _install(net, prior)
    return priors
