"""Régions → cartes ScatterNet empilées pour le réseau"""
import json
import logging
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from app.core.errors import ParameterError
from app.scatternet.filters import DtcwtFilterBank
from app.scatternet.transform import GrayImage, scatter
from app.schemas.scatter import ScatterConfig

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 200


def scatter_regions(
    regions: Iterable[np.ndarray], bank: DtcwtFilterBank, config: ScatterConfig
) -> np.ndarray:
    """(N, canaux, lignes, colonnes) en float32 pour limiter la mémoire"""
    stack = []
    for i, region in enumerate(regions):
        image = region if isinstance(region, GrayImage) else GrayImage(region)
        stack.append(scatter(image, bank, config).as_tensor().astype(np.float32))
        if (i + 1) % PROGRESS_EVERY == 0:
            logger.debug(f"📊 {i + 1} régions transformées")
    if not stack:
        raise ParameterError("aucune région à transformer")
    return np.stack(stack)


def resolve_scatter_config(base: ScatterConfig, calibration_path: Optional[Union[str, Path]]) -> ScatterConfig:
    """Appliquer les offsets k_j calibrés s'ils ont été enregistrés"""
    if calibration_path is None or not Path(calibration_path).exists():
        return base
    with open(calibration_path, "r", encoding="utf-8") as f:
        offsets = tuple(json.load(f)["log_offsets"])
    if len(offsets) != base.num_scales:
        logger.warning(f"⚠️ Calibration ignorée: {len(offsets)} offsets pour {base.num_scales} échelles")
        return base
    return base.model_copy(update={"log_offsets": offsets})
