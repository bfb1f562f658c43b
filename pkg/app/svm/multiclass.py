"""Classification d'activité : SVM gaussien un-contre-un sur les vecteurs d'angles"""
import logging
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.metrics import confusion_matrix as sk_confusion_matrix

from app.core.errors import DatasetNotFoundError, DimensionError, ParameterError, TrainingError
from app.schemas.activity import ALL_LABELS, ActivityLabel, SvmHyperparams
from app.svm.smo import BinarySvm, decision_values, train_binary
from app.utils.serializers import bundle_paths, read_array_bundle, write_array_bundle

logger = logging.getLogger(__name__)

LABEL_ORDER: Tuple[str, ...] = tuple(label.value for label in ALL_LABELS)


def as_label_values(labels: Sequence[Union[str, ActivityLabel]]) -> np.ndarray:
    """Normaliser des étiquettes (chaînes ou ActivityLabel) en chaînes"""
    try:
        return np.array([ActivityLabel(label).value for label in labels], dtype=object)
    except ValueError as e:
        raise ParameterError(f"étiquette d'activité inconnue: {e}") from e


def fit_standardizer(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Moyenne et facteur d'échelle par dimension

    Chaque dimension est centrée-réduite puis remise à l'échelle commune (écart-type
    quadratique moyen des dimensions non constantes) : gamma garde l'unité des
    entrées. Les dimensions constantes reçoivent un facteur nul.
    """
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    varying = std > 1e-12
    scale = np.zeros_like(std)
    if np.any(varying):
        pooled = np.sqrt(np.mean(std[varying] ** 2))
        scale[varying] = pooled / std[varying]
    return mean, scale


class SvmModel(ClassifierMixin, BaseEstimator):
    """SVM multiclasse un-contre-un (estimateur scikit-learn)

    Après `fit` : `classes_`, `mean_`, `scale_`, `pairs_` (paire → BinarySvm) et
    `warnings_` (paires ignorées faute d'exemples).
    """

    def __init__(
        self,
        C: float = 14.0,
        gamma: float = 2e-5,
        kkt_tolerance: float = 1e-3,
        solver_tolerance: float = 1e-7,
        max_iter: int = 1_000_000,
    ):
        self.C = C
        self.gamma = gamma
        self.kkt_tolerance = kkt_tolerance
        self.solver_tolerance = solver_tolerance
        self.max_iter = max_iter

    @property
    def hyperparams(self) -> SvmHyperparams:
        return SvmHyperparams(**self.get_params())

    def fit(self, X, y) -> "SvmModel":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        y = as_label_values(y)
        if len(X) != len(y):
            raise DimensionError(f"{len(X)} vecteurs pour {len(y)} étiquettes")
        present = [label for label in LABEL_ORDER if np.any(y == label)]
        if len(present) < 2:
            raise TrainingError("au moins deux classes sont nécessaires")

        hp = self.hyperparams
        self.mean_, self.scale_ = fit_standardizer(X)
        Z = self.transform(X)
        self.classes_ = np.array(LABEL_ORDER, dtype=object)
        self.n_features_in_ = X.shape[1]
        self.pairs_: Dict[Tuple[str, str], BinarySvm] = {}
        self.warnings_: List[str] = []

        for positive, negative in combinations(LABEL_ORDER, 2):
            if positive not in present or negative not in present:
                message = f"paire ({positive}, {negative}) ignorée : classe absente"
                self.warnings_.append(message)
                logger.warning(f"⚠️ {message}")
                continue
            mask = (y == positive) | (y == negative)
            targets = np.where(y[mask] == positive, 1.0, -1.0)
            self.pairs_[(positive, negative)] = train_binary(Z[mask], targets, hp)
        logger.info(
            f"✅ SVM entraîné: {len(self.pairs_)} modèles binaires, C={hp.C:g}, gamma={hp.gamma:g}"
        )
        return self

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.mean_):
            raise DimensionError(f"dimension {X.shape[1]} au lieu de {len(self.mean_)}")
        return (X - self.mean_) * self.scale_

    def pair_decisions(self, X) -> Dict[Tuple[str, str], np.ndarray]:
        Z = self.transform(X)
        return {pair: decision_values(model, Z) for pair, model in self.pairs_.items()}

    def vote(self, X) -> Tuple[np.ndarray, np.ndarray]:
        """Étiquettes votées et votes par classe (n, 6), dans l'ordre de LABEL_ORDER"""
        decisions = self.pair_decisions(X)
        n = len(np.atleast_2d(X))
        votes = np.zeros((n, len(LABEL_ORDER)), dtype=int)
        margins = np.zeros((n, len(LABEL_ORDER)))
        index = {label: k for k, label in enumerate(LABEL_ORDER)}
        for (positive, negative), values in decisions.items():
            p, q = index[positive], index[negative]
            wins = values >= 0
            votes[wins, p] += 1
            votes[~wins, q] += 1
            margins[:, p] += values
            margins[:, q] -= values

        labels = np.empty(n, dtype=object)
        for row in range(n):
            tied = np.flatnonzero(votes[row] == votes[row].max())
            # égalité : somme des marges, puis ordre des étiquettes
            best = tied[np.argmax(margins[row, tied])]
            labels[row] = LABEL_ORDER[best]
        return labels, votes

    def predict(self, X) -> np.ndarray:
        return self.vote(X)[0]


def train_multiclass(
    X: np.ndarray, labels: Sequence[Union[str, ActivityLabel]], hp: Optional[SvmHyperparams] = None
) -> SvmModel:
    hp = hp or SvmHyperparams()
    return SvmModel(**hp.model_dump()).fit(X, labels)


def predict(model: SvmModel, angles: np.ndarray) -> Tuple[ActivityLabel, Dict[str, int]]:
    """Étiquette d'une personne et nombre de votes par classe"""
    vector = np.asarray(angles, dtype=np.float64).ravel()
    if vector.size != model.n_features_in_:
        raise DimensionError(f"vecteur de {vector.size} angles au lieu de {model.n_features_in_}")
    labels, votes = model.vote(vector[None])
    return ActivityLabel(labels[0]), dict(zip(LABEL_ORDER, votes[0].tolist()))


def confusion_matrix(truth: Sequence, predicted: Sequence) -> np.ndarray:
    """Matrice de confusion 6×6 (lignes : vérité, colonnes : prédiction)"""
    return sk_confusion_matrix(as_label_values(truth), as_label_values(predicted), labels=list(LABEL_ORDER))


def save_svm(model: SvmModel, stem: Union[str, Path]) -> Path:
    arrays = {"mean": model.mean_, "scale": model.scale_}
    pairs = []
    for k, ((positive, negative), binary) in enumerate(model.pairs_.items()):
        arrays[f"pair{k}.support_vectors"] = binary.support_vectors
        arrays[f"pair{k}.alphas"] = binary.alphas
        arrays[f"pair{k}.labels"] = binary.labels
        arrays[f"pair{k}.support_indices"] = binary.support_indices
        pairs.append({
            "positive": positive,
            "negative": negative,
            "rho": binary.rho,
            "iterations": binary.iterations,
            "converged": binary.converged,
        })
    header = {
        "kind": "svm_model",
        "labels": list(LABEL_ORDER),
        "hyperparams": model.hyperparams.model_dump(),
        "pairs": pairs,
        "warnings": model.warnings_,
    }
    _, json_path = write_array_bundle(stem, arrays, header=header)
    logger.info(f"💾 Modèle SVM écrit dans {json_path}")
    return json_path


def load_svm(stem: Union[str, Path]) -> SvmModel:
    if not bundle_paths(stem)[1].exists():
        raise DatasetNotFoundError(f"modèle SVM introuvable: {stem}")
    arrays, header = read_array_bundle(stem)
    hp = SvmHyperparams(**header["hyperparams"])
    model = SvmModel(**hp.model_dump())
    model.mean_ = arrays["mean"]
    model.scale_ = arrays["scale"]
    model.classes_ = np.array(header["labels"], dtype=object)
    model.n_features_in_ = len(model.mean_)
    model.warnings_ = list(header.get("warnings", []))
    model.pairs_ = {}
    for k, pair in enumerate(header["pairs"]):
        model.pairs_[(pair["positive"], pair["negative"])] = BinarySvm(
            support_vectors=arrays[f"pair{k}.support_vectors"].reshape(-1, model.n_features_in_),
            alphas=arrays[f"pair{k}.alphas"],
            labels=arrays[f"pair{k}.labels"],
            support_indices=arrays[f"pair{k}.support_indices"].astype(int),
            rho=pair["rho"],
            gamma=hp.gamma,
            C=hp.C,
            iterations=pair["iterations"],
            converged=pair["converged"],
        )
    return model
