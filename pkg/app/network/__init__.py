"""Réseau de régression des points clés"""
from app.network.loss import TUKEY_C, mad_scale, reference_scale, tukey_biweight_loss
from app.network.model import (
    RegressionNet,
    backward,
    create_net,
    fc1_activations,
    forward,
    forward_to_layer,
    gradient_check,
    init_with_priors,
    load_checkpoint,
    loss_and_gradients,
    predict_keypoints,
    save_checkpoint,
    sgd_step,
)
from app.network.training import EpochRecord, TrainingHistory, TrainingResult, evaluate_loss, train

__all__ = [
    "TUKEY_C",
    "mad_scale",
    "reference_scale",
    "tukey_biweight_loss",
    "RegressionNet",
    "backward",
    "create_net",
    "fc1_activations",
    "forward",
    "forward_to_layer",
    "gradient_check",
    "init_with_priors",
    "load_checkpoint",
    "loss_and_gradients",
    "predict_keypoints",
    "save_checkpoint",
    "sgd_step",
    "EpochRecord",
    "TrainingHistory",
    "TrainingResult",
    "evaluate_loss",
    "train",
]
