"""Sélection de (C, gamma) par validation croisée stratifiée"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import StratifiedKFold, cross_val_score

from app.core.errors import ParameterError, StratificationError
from app.schemas.activity import SvmHyperparams
from app.svm.multiclass import LABEL_ORDER, SvmModel, as_label_values

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridScore:
    C: float
    gamma: float
    mean_accuracy: float
    std_accuracy: float


@dataclass
class CrossValidationReport:
    best: SvmHyperparams
    scores: List[GridScore] = field(default_factory=list)
    folds: int = 5
    seed: int = 0

    def to_rows(self) -> List[Tuple[float, float, float, float, bool]]:
        return [
            (s.C, s.gamma, s.mean_accuracy, s.std_accuracy,
             s.C == self.best.C and s.gamma == self.best.gamma)
            for s in self.scores
        ]


def check_stratification(labels: np.ndarray, folds: int) -> None:
    counts = Counter(labels)
    for label in LABEL_ORDER:
        if 0 < counts.get(label, 0) < folds:
            raise StratificationError(
                f"classe '{label}' : {counts[label]} exemples pour {folds} plis", label=label
            )


def cross_validate(
    X: np.ndarray,
    labels: Sequence,
    C_grid: Sequence[float],
    gamma_grid: Sequence[float],
    folds: int = 5,
    seed: int = 0,
    base: Optional[SvmHyperparams] = None,
) -> CrossValidationReport:
    """Point de grille de meilleure précision moyenne ; égalités vers C puis gamma les plus petits"""
    if folds < 2:
        raise ParameterError("au moins deux plis sont nécessaires")
    if not C_grid or not gamma_grid:
        raise ParameterError("grille vide")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = as_label_values(labels)
    check_stratification(y, folds)

    base = base or SvmHyperparams()
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    splits = list(splitter.split(X, y))

    scores: List[GridScore] = []
    best: Optional[GridScore] = None
    for C, gamma in product(sorted(C_grid), sorted(gamma_grid)):
        hp = base.model_copy(update={"C": float(C), "gamma": float(gamma)})
        accuracies = cross_val_score(SvmModel(**hp.model_dump()), X, y, cv=splits, error_score="raise")
        score = GridScore(float(C), float(gamma), float(accuracies.mean()), float(accuracies.std()))
        scores.append(score)
        logger.debug(f"📊 C={C:g} gamma={gamma:g}: {score.mean_accuracy:.4f}")
        if best is None or score.mean_accuracy > best.mean_accuracy:
            best = score

    selected = base.model_copy(update={"C": best.C, "gamma": best.gamma})
    logger.info(f"✅ Validation croisée: C={best.C:g}, gamma={best.gamma:g} ({best.mean_accuracy:.4f})")
    return CrossValidationReport(best=selected, scores=scores, folds=folds, seed=seed)
