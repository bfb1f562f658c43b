"""SVM binaire à marge souple, dual résolu par SMO

Le dual est

    min_α  ½ αᵀQα − eᵀα    s.c.  yᵀα = 0,  0 <= α_i <= C,   Q_ij = y_i y_j K(x_i, x_j)

et la fonction de décision f(x) = Σ α_i y_i K(x_i, x) − ρ. La paire de travail est la
paire de violation maximale (I_up, I_low) ; le premier indice l'emporte en cas d'égalité,
ce qui rend l'entraînement déterministe.
"""
import logging
from dataclasses import dataclass

import numpy as np

from app.core.errors import DimensionError, TrainingError
from app.schemas.activity import SvmHyperparams
from app.svm.kernel import gram_matrix

logger = logging.getLogger(__name__)

TAU = 1e-12


@dataclass(frozen=True, eq=False)
class BinarySvm:
    support_vectors: np.ndarray
    alphas: np.ndarray
    labels: np.ndarray  # ±1
    support_indices: np.ndarray  # positions dans l'ensemble d'entraînement
    rho: float
    gamma: float
    C: float
    iterations: int = 0
    converged: bool = True

    @property
    def dual_coef(self) -> np.ndarray:
        return self.alphas * self.labels

    @property
    def num_support(self) -> int:
        return len(self.alphas)


def _check_binary(X: np.ndarray, y: np.ndarray):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(X) != len(y):
        raise DimensionError(f"{len(X)} vecteurs pour {len(y)} étiquettes")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("les étiquettes binaires doivent valoir ±1")
    if np.all(y == 1) or np.all(y == -1):
        raise TrainingError("les deux classes doivent être présentes")
    return X, y


def _compute_rho(alpha: np.ndarray, y: np.ndarray, G: np.ndarray, C: float) -> float:
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        return float(yG[free].mean())
    at_upper = alpha >= C
    # bornes de ρ données par les points aux bornes
    upper_side = (at_upper & (y < 0)) | (~at_upper & (y > 0))
    ub = yG[upper_side].min() if np.any(upper_side) else np.inf
    lb = yG[~upper_side].max() if np.any(~upper_side) else -np.inf
    if not np.isfinite(ub):
        return float(lb)
    if not np.isfinite(lb):
        return float(ub)
    return float((ub + lb) / 2)


def train_binary(X: np.ndarray, y: np.ndarray, hp: SvmHyperparams) -> BinarySvm:
    X, y = _check_binary(X, y)
    C = hp.C
    n = len(y)
    K = gram_matrix(X, X, hp.gamma)
    diag = np.diag(K)

    alpha = np.zeros(n)
    G = -np.ones(n)
    converged = False
    iteration = 0
    for iteration in range(hp.max_iter):
        minus_yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        i = int(np.argmax(np.where(up, minus_yG, -np.inf)))
        j = int(np.argmin(np.where(low, minus_yG, np.inf)))
        gap = minus_yG[i] - minus_yG[j]
        if gap < hp.solver_tolerance:
            converged = True
            break

        curvature = max(diag[i] + diag[j] - 2 * K[i, j], TAU)
        bound_i = C - alpha[i] if y[i] > 0 else alpha[i]
        bound_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = min(gap / curvature, bound_i, bound_j)

        alpha[i] = np.clip(alpha[i] + y[i] * step, 0.0, C)
        alpha[j] = np.clip(alpha[j] - y[j] * step, 0.0, C)
        if step == bound_i:
            alpha[i] = C if y[i] > 0 else 0.0
        if step == bound_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        G += y * step * (K[:, i] - K[:, j])

    if not converged:
        logger.warning(f"⚠️ SMO: pas de convergence après {hp.max_iter} itérations")

    support = np.flatnonzero(alpha > 0)
    return BinarySvm(
        support_vectors=X[support].copy(),
        alphas=alpha[support].copy(),
        labels=y[support].copy(),
        support_indices=support,
        rho=_compute_rho(alpha, y, G, C),
        gamma=hp.gamma,
        C=C,
        iterations=iteration + 1 if converged else hp.max_iter,
        converged=converged,
    )


def decision_values(model: BinarySvm, X: np.ndarray) -> np.ndarray:
    """f(x) pour chaque ligne de X"""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.num_support == 0:
        return np.full(len(X), -model.rho)
    if X.shape[1] != model.support_vectors.shape[1]:
        raise DimensionError(
            f"dimension {X.shape[1]} au lieu de {model.support_vectors.shape[1]}"
        )
    return gram_matrix(X, model.support_vectors, model.gamma) @ model.dual_coef - model.rho


def full_alphas(model: BinarySvm, n: int) -> np.ndarray:
    alpha = np.zeros(n)
    alpha[model.support_indices.astype(int)] = model.alphas
    return alpha


def kkt_violations(model: BinarySvm, X: np.ndarray, y: np.ndarray, tolerance: float = 1e-3) -> np.ndarray:
    """Indices des points d'entraînement qui violent les conditions KKT

    α = 0 ⇒ y·f >= 1 ; 0 < α < C ⇒ y·f = 1 ; α = C ⇒ y·f <= 1, à `tolerance` près.
    """
    X, y = _check_binary(X, y)
    alpha = full_alphas(model, len(y))
    margin = y * decision_values(model, X)
    at_lower = alpha <= 0
    at_upper = alpha >= model.C
    free = ~at_lower & ~at_upper
    violated = (
        (at_lower & (margin < 1 - tolerance))
        | (at_upper & (margin > 1 + tolerance))
        | (free & (np.abs(margin - 1) > tolerance))
    )
    return np.flatnonzero(violated)


def dual_objective(model: BinarySvm) -> float:
    """½ αᵀQα − eᵀα, calculé sur les vecteurs de support"""
    if model.num_support == 0:
        return 0.0
    coef = model.dual_coef
    K = gram_matrix(model.support_vectors, model.support_vectors, model.gamma)
    return float(0.5 * coef @ K @ coef - model.alphas.sum())
