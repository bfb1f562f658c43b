"""Entraînement SGD du réseau de régression"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from app.core.errors import DivergenceError
from app.network.loss import reference_scale, tukey_biweight_loss
from app.network.model import RegressionNet, predict_keypoints, sgd_step
from app.schemas.network import TrainConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    val_loss: float


@dataclass
class TrainingHistory:
    """Courbe de perte, une ligne par époque"""
    records: List[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def val_losses(self) -> List[float]:
        return [r.val_loss for r in self.records]

    @property
    def final_val_loss(self) -> Optional[float]:
        return self.records[-1].val_loss if self.records else None

    def epochs_to_reach(self, threshold: float) -> Optional[int]:
        """Nombre d'époques pour atteindre une perte de validation <= threshold"""
        for record in self.records:
            if record.val_loss <= threshold:
                return record.epoch + 1
        return None

    def to_rows(self) -> List[tuple]:
        return [(r.epoch, r.train_loss, r.val_loss) for r in self.records]


@dataclass
class TrainingResult:
    """Issue d'un entraînement

    `net` porte les poids de meilleure perte de validation, sauf en cas de divergence
    où il porte le dernier état fini. `best_net` garde toujours les poids de meilleure
    validation (None si aucune époque n'est terminée).
    """
    net: RegressionNet
    history: TrainingHistory
    best_epoch: Optional[int] = None
    best_val_loss: Optional[float] = None
    diverged: bool = False
    diagnostic: Optional[str] = None
    best_net: Optional[RegressionNet] = None


def evaluate_loss(net: RegressionNet, x: np.ndarray, targets: np.ndarray, sigma: Optional[float] = None) -> float:
    """Perte de Tukey en mode inférence, à échelle fixe"""
    targets = np.asarray(targets, dtype=np.float64)
    if sigma is None:
        sigma = reference_scale(targets)
    pred = predict_keypoints(net, x)
    loss, _ = tukey_biweight_loss(pred, targets.reshape(pred.shape), sigma=sigma)
    return loss


def train(
    net: RegressionNet,
    train_x: np.ndarray,
    train_y: np.ndarray,
    val_x: np.ndarray,
    val_y: np.ndarray,
    config: TrainConfig,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> TrainingResult:
    """SGD par mini-lots ; renvoie les poids de meilleure perte de validation

    L'ordre des lots et les masques de dropout dérivent de (seed, époque).
    En cas de pas divergent, l'entraînement s'arrête : `net` est le dernier état
    fini, `best_net` la meilleure époque terminée, avec un diagnostic.
    """
    history = TrainingHistory()
    if config.epochs == 0:
        return TrainingResult(net=net, history=history, best_net=net)

    train_x = np.asarray(train_x, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.float64)
    sigma_val = reference_scale(val_y)
    n = len(train_x)

    best_net, best_loss, best_epoch = None, np.inf, None
    current = net
    logger.info(
        f"🚀 Entraînement ({net.init_mode}): {config.epochs} époques, {n} exemples, "
        f"lots de {config.batch_size}"
    )
    for epoch in range(config.epochs):
        lr = config.learning_rate(epoch)
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, epoch]))
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            dropout_seed = int(rng.integers(2 ** 31))
            try:
                current, loss = sgd_step(current, train_x[idx], train_y[idx], lr, dropout_seed)
            except DivergenceError as exc:
                diagnostic = f"époque {epoch}, lot {start // config.batch_size}: {exc}"
                logger.error(f"❌ Divergence: {diagnostic}")
                return TrainingResult(
                    net=current,
                    best_net=best_net,
                    history=history,
                    best_epoch=best_epoch,
                    best_val_loss=None if best_epoch is None else float(best_loss),
                    diverged=True,
                    diagnostic=diagnostic,
                )
            batch_losses.append(loss)

        val_loss = evaluate_loss(current, val_x, val_y, sigma_val)
        record = EpochRecord(epoch=epoch, lr=lr, train_loss=float(np.mean(batch_losses)), val_loss=val_loss)
        history.records.append(record)
        logger.debug(f"📊 Époque {epoch}: lr={lr:g} train={record.train_loss:.6f} val={val_loss:.6f}")
        if on_epoch is not None:
            on_epoch(record)
        if val_loss < best_loss:
            best_net, best_loss, best_epoch = current, val_loss, epoch

    if best_net is None:
        best_net = current
    logger.info(f"✅ Meilleure perte de validation {best_loss:.6f} à l'époque {best_epoch}")
    return TrainingResult(
        net=best_net, history=history, best_epoch=best_epoch, best_val_loss=float(best_loss), best_net=best_net,
    )
