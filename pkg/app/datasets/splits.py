"""Découpage apprentissage / validation / test"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import train_test_split

from app.core.errors import ParameterError

logger = logging.getLogger(__name__)

POSE_PROPORTIONS = (0.6, 0.2, 0.2)
ACTIVITY_PROPORTIONS = (0.6, 0.4)
MIN_ITEMS = 5


@dataclass(frozen=True)
class DatasetSplit:
    train: Tuple[int, ...]
    val: Tuple[int, ...]
    test: Tuple[int, ...]
    seed: int

    @property
    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.val), len(self.test)


def _labels_of(items: Sequence) -> Optional[np.ndarray]:
    if items and all(hasattr(item, "label") for item in items):
        return np.array([str(getattr(item.label, "value", item.label)) for item in items])
    return None


def _divide(indices: np.ndarray, first: int, labels: Optional[np.ndarray], seed: int):
    """Séparer `indices` en `first` éléments et le reste, stratifié si possible"""
    if first == 0:
        return indices[:0], indices
    if first == len(indices):
        return indices, indices[:0]
    stratify = labels[indices] if labels is not None else None
    try:
        return train_test_split(indices, train_size=first, random_state=seed, shuffle=True, stratify=stratify)
    except ValueError:
        if stratify is None:
            raise
        logger.warning("⚠️ Classes trop petites pour stratifier, découpage aléatoire simple")
        return train_test_split(indices, train_size=first, random_state=seed, shuffle=True)


def split(
    items: Sequence,
    seed: int = 0,
    proportions: Sequence[float] = POSE_PROPORTIONS,
    labels: Optional[Sequence] = None,
) -> DatasetSplit:
    """Découpage déterministe, stratifié par étiquette

    Tailles : floor(p_train·n), floor(p_val·n), le reste en test. Avec deux
    proportions (protocole 60/40 du classifieur), la validation est vide.
    """
    n = len(items)
    if n < MIN_ITEMS:
        raise ParameterError(f"au moins {MIN_ITEMS} éléments sont nécessaires, reçu {n}")
    if len(proportions) == 2:
        proportions = (proportions[0], 0.0, proportions[1])
    if len(proportions) != 3 or any(p < 0 for p in proportions) or abs(sum(proportions) - 1) > 1e-9:
        raise ParameterError(f"proportions invalides: {tuple(proportions)}")

    label_array = np.array([str(getattr(l, "value", l)) for l in labels]) if labels is not None else _labels_of(items)
    n_train = int(np.floor(proportions[0] * n + 1e-9))
    n_val = int(np.floor(proportions[1] * n + 1e-9))

    indices = np.arange(n)
    train, rest = _divide(indices, n_train, label_array, seed)
    val, test = _divide(rest, n_val, label_array, seed + 1)
    result = DatasetSplit(
        train=tuple(sorted(int(i) for i in train)),
        val=tuple(sorted(int(i) for i in val)),
        test=tuple(sorted(int(i) for i in test)),
        seed=seed,
    )
    logger.info(f"📊 Découpage {result.sizes} (graine {seed})")
    return result
