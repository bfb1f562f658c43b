"""Réseau de régression : L3-L6 (convolutions) + fc1 + fc2 → 28 coordonnées"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np

from app.core.errors import ConfigurationError, DatasetNotFoundError, DivergenceError
from app.network import layers
from app.network.loss import tukey_biweight_loss
from app.schemas.network import NetConfig
from app.utils.serializers import bundle_paths, read_array_bundle, write_array_bundle

if TYPE_CHECKING:
    from app.priors.pca import PriorFilterSet

logger = logging.getLogger(__name__)

InitMode = Literal["random", "structural_prior"]


@dataclass(frozen=True, eq=False)
class RegressionNet:
    config: NetConfig
    in_channels: int
    input_shape: Tuple[int, int]
    params: Dict[str, np.ndarray]
    init_mode: InitMode = "random"
    dropout_keep: float = 0.5

    def __post_init__(self):
        expected = parameter_shapes(self.config, self.in_channels, self.input_shape)
        for name, shape in expected.items():
            if name not in self.params:
                raise ConfigurationError(f"paramètre manquant: {name}")
            if self.params[name].shape != shape:
                raise ConfigurationError(
                    f"forme de {name}: {self.params[name].shape}, attendu {shape}"
                )

    @property
    def parameter_names(self) -> List[str]:
        return list(parameter_shapes(self.config, self.in_channels, self.input_shape))

    def replace(self, params: Mapping[str, np.ndarray], init_mode: Optional[InitMode] = None) -> "RegressionNet":
        return RegressionNet(
            config=self.config,
            in_channels=self.in_channels,
            input_shape=self.input_shape,
            params=dict(params),
            init_mode=init_mode or self.init_mode,
            dropout_keep=self.dropout_keep,
        )

    def rounded_to_float32(self) -> "RegressionNet":
        """Poids arrondis à la précision du checkpoint"""
        return self.replace({k: v.astype(np.float32).astype(np.float64) for k, v in self.params.items()})


def _pooled(size: int) -> int:
    return size // 2


def feature_shape(config: NetConfig, input_shape: Tuple[int, int], layer_index: int) -> Tuple[int, int, int]:
    """Forme (canaux, lignes, colonnes) en sortie de la convolution `layer_index` (pool inclus)"""
    rows, cols = input_shape
    for i in range(layer_index + 1):
        if i in config.pool_after:
            rows, cols = _pooled(rows), _pooled(cols)
    return config.conv_widths[layer_index], rows, cols


def parameter_shapes(config: NetConfig, in_channels: int, input_shape: Tuple[int, int]) -> Dict[str, Tuple[int, ...]]:
    """Formes des paramètres, dans l'ordre déclaré des couches"""
    shapes: Dict[str, Tuple[int, ...]] = {}
    k = config.kernel_size
    channels = in_channels
    for layer_id, width in zip(config.layer_ids, config.conv_widths):
        shapes[f"{layer_id}.weight"] = (width, channels, k, k)
        shapes[f"{layer_id}.bias"] = (width,)
        channels = width
    c, rows, cols = feature_shape(config, input_shape, len(config.conv_widths) - 1)
    if rows < 1 or cols < 1:
        raise ConfigurationError(f"entrée {input_shape} trop petite pour les max-pools")
    flat = c * rows * cols
    shapes["fc1.weight"] = (config.fc1_width, flat)
    shapes["fc1.bias"] = (config.fc1_width,)
    shapes["fc2.weight"] = (config.output_width, config.fc1_width)
    shapes["fc2.bias"] = (config.output_width,)
    return shapes


def create_net(
    config: NetConfig,
    in_channels: int,
    input_shape: Tuple[int, int],
    seed: int = 0,
    dropout_keep: float = 0.5,
) -> RegressionNet:
    """Initialisation aléatoire : He pour les convolutions, uniforme ±1/√fan_in pour les couches denses"""
    rng = np.random.default_rng(seed)
    params: Dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(config, in_channels, input_shape).items():
        if name.endswith(".bias"):
            params[name] = np.zeros(shape)
        elif name.startswith("fc"):
            bound = 1.0 / np.sqrt(shape[1])
            params[name] = rng.uniform(-bound, bound, size=shape)
        else:
            fan_in = int(np.prod(shape[1:]))
            params[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
    # Sorties normalisées dans [0, 1] : on part du centre de la région
    params["fc2.bias"] = np.full(config.output_width, 0.5)
    return RegressionNet(config, in_channels, tuple(input_shape), params, "random", dropout_keep)


def _check_input(net: RegressionNet, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        x = x[None]
    if x.ndim != 4:
        raise ConfigurationError(f"tenseur 4D attendu, reçu {x.ndim} dimensions")
    if x.shape[1] != net.in_channels:
        raise ConfigurationError(f"{x.shape[1]} canaux en entrée, le réseau en attend {net.in_channels}")
    if tuple(x.shape[2:]) != tuple(net.input_shape):
        raise ConfigurationError(f"cartes {x.shape[2:]}, le réseau attend {net.input_shape}")
    return x


def _conv_block(net: RegressionNet, x: np.ndarray, index: int, caches: Optional[list]) -> np.ndarray:
    cfg = net.config
    layer_id = cfg.layer_ids[index]
    out, conv_cache = layers.conv2d_forward(x, net.params[f"{layer_id}.weight"], net.params[f"{layer_id}.bias"])
    out, relu_cache = layers.relu_forward(out)
    out, lrn_cache = layers.lrn_forward(out, cfg.lrn_size, cfg.lrn_alpha, cfg.lrn_beta, cfg.lrn_k)
    pool_cache = None
    if index in cfg.pool_after:
        out, pool_cache = layers.maxpool_forward(out)
    if caches is not None:
        caches.append((conv_cache, relu_cache, lrn_cache, pool_cache))
    return out


def forward_to_layer(net: RegressionNet, x: np.ndarray, layer_index: int) -> np.ndarray:
    """Sorties de la convolution `layer_index` (ReLU, LRN et pool compris)"""
    out = _check_input(net, x)
    for i in range(layer_index + 1):
        out = _conv_block(net, out, i, None)
    return out


def _forward(net: RegressionNet, x: np.ndarray, train_mode: bool, seed: Optional[int], caches: Optional[list]) -> np.ndarray:
    out = _check_input(net, x)
    for i in range(len(net.config.conv_widths)):
        out = _conv_block(net, out, i, caches)
    flat_shape = out.shape
    out = out.reshape(out.shape[0], -1)
    out, fc1_cache = layers.dense_forward(out, net.params["fc1.weight"], net.params["fc1.bias"])
    out, relu_cache = layers.relu_forward(out)
    rng = np.random.default_rng(seed) if train_mode else None
    out, dropout_mask = layers.dropout_forward(out, net.dropout_keep, train_mode, rng)
    out, fc2_cache = layers.dense_forward(out, net.params["fc2.weight"], net.params["fc2.bias"])
    if caches is not None:
        caches.append((flat_shape, fc1_cache, relu_cache, dropout_mask, fc2_cache))
    return out


def fc1_activations(net: RegressionNet, x: np.ndarray, train_mode: bool = False, seed: Optional[int] = None) -> np.ndarray:
    """Activations de fc1 après ReLU et dropout"""
    out = forward_to_layer(net, x, len(net.config.conv_widths) - 1)
    out, _ = layers.dense_forward(out.reshape(out.shape[0], -1), net.params["fc1.weight"], net.params["fc1.bias"])
    out, _ = layers.relu_forward(out)
    rng = np.random.default_rng(seed) if train_mode else None
    out, _ = layers.dropout_forward(out, net.dropout_keep, train_mode, rng)
    return out


def forward(net: RegressionNet, x: np.ndarray, train_mode: bool = False, seed: Optional[int] = None) -> np.ndarray:
    """Passe avant ; (batch, 28). Le dropout n'est tiré qu'en mode entraînement"""
    return _forward(net, x, train_mode, seed, None)


def backward(net: RegressionNet, caches: list, dout: np.ndarray) -> Dict[str, np.ndarray]:
    """Gradients de tous les paramètres à partir du gradient des sorties"""
    grads: Dict[str, np.ndarray] = {}
    flat_shape, fc1_cache, relu_cache, dropout_mask, fc2_cache = caches[-1]
    d, grads["fc2.weight"], grads["fc2.bias"] = layers.dense_backward(dout, fc2_cache)
    d = layers.dropout_backward(d, dropout_mask)
    d = layers.relu_backward(d, relu_cache)
    d, grads["fc1.weight"], grads["fc1.bias"] = layers.dense_backward(d, fc1_cache)
    d = d.reshape(flat_shape)

    for index in reversed(range(len(net.config.conv_widths))):
        layer_id = net.config.layer_ids[index]
        conv_cache, relu_mask, lrn_cache, pool_cache = caches[index]
        if pool_cache is not None:
            d = layers.maxpool_backward(d, pool_cache)
        d = layers.lrn_backward(d, lrn_cache)
        d = layers.relu_backward(d, relu_mask)
        d, grads[f"{layer_id}.weight"], grads[f"{layer_id}.bias"] = layers.conv2d_backward(d, conv_cache)
    return grads


def loss_and_gradients(
    net: RegressionNet,
    x: np.ndarray,
    targets: np.ndarray,
    train_mode: bool = True,
    seed: Optional[int] = None,
    sigma: Optional[float] = None,
) -> Tuple[float, Dict[str, np.ndarray]]:
    caches: list = []
    pred = _forward(net, x, train_mode, seed, caches)
    loss, dpred = tukey_biweight_loss(pred, np.asarray(targets, dtype=np.float64).reshape(pred.shape), sigma)
    return loss, backward(net, caches, dpred)


def sgd_step(
    net: RegressionNet,
    x: np.ndarray,
    targets: np.ndarray,
    lr: float,
    seed: Optional[int] = None,
) -> Tuple[RegressionNet, float]:
    """Un pas de SGD : θ ← θ − lr · (gradient moyen du lot)

    Une perte, un gradient ou un paramètre mis à jour non fini lève DivergenceError ;
    le réseau d'entrée n'est pas modifié.
    """
    if len(x) == 0:
        raise ConfigurationError("lot vide")
    loss, grads = loss_and_gradients(net, x, targets, train_mode=True, seed=seed)
    if not np.isfinite(loss):
        raise DivergenceError(f"perte non finie ({loss}) : pas SGD annulé")
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise DivergenceError(f"gradient non fini pour {name} : pas SGD annulé")
    params = {name: value - lr * grads[name] for name, value in net.params.items()}
    for name, value in params.items():
        if not np.all(np.isfinite(value)):
            raise DivergenceError(f"paramètre {name} non fini après le pas (lr={lr:g})")
    return net.replace(params), loss


def init_with_priors(net: RegressionNet, priors: Mapping[str, "PriorFilterSet"]) -> RegressionNet:
    """Installer les priors structurels dans L3-L6 (biais nuls)"""
    params = dict(net.params)
    for layer_id in net.config.layer_ids:
        if layer_id not in priors:
            raise ConfigurationError(f"prior manquant pour {layer_id}")
        weights = priors[layer_id].weights
        expected = net.params[f"{layer_id}.weight"].shape
        if weights.shape != expected:
            raise ConfigurationError(
                f"prior {layer_id} de forme {weights.shape}, la couche attend {expected}"
            )
        params[f"{layer_id}.weight"] = np.array(weights)
        params[f"{layer_id}.bias"] = np.zeros(expected[0])
    return net.replace(params, init_mode="structural_prior")


def predict_keypoints(net: RegressionNet, x: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Inférence par lots ; (N, 28) coordonnées normalisées"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        x = x[None]
    outputs = [forward(net, x[i:i + batch_size]) for i in range(0, len(x), batch_size)]
    if not outputs:
        return np.zeros((0, net.config.output_width))
    return np.concatenate(outputs)


def gradient_check(
    net: RegressionNet,
    x: np.ndarray,
    targets: np.ndarray,
    sigma: float = 1.0,
    eps: float = 1e-5,
    samples_per_param: int = 12,
    seed: int = 0,
) -> Dict[str, float]:
    """Erreur relative gradient analytique / différences finies centrées, par paramètre

    L'erreur est ||a − n|| / (||a|| + ||n||) sur un échantillon d'indices.
    Le dropout est tiré avec une graine fixe pour que chaque évaluation soit identique.
    """
    _, grads = loss_and_gradients(net, x, targets, train_mode=True, seed=seed, sigma=sigma)
    rng = np.random.default_rng(seed)
    errors: Dict[str, float] = {}
    for name, value in net.params.items():
        flat_indices = rng.choice(value.size, size=min(samples_per_param, value.size), replace=False)
        analytic = []
        numeric = []
        for flat_index in flat_indices:
            index = np.unravel_index(flat_index, value.shape)
            losses = []
            for delta in (eps, -eps):
                perturbed = dict(net.params)
                perturbed[name] = value.copy()
                perturbed[name][index] += delta
                loss, _ = loss_and_gradients(net.replace(perturbed), x, targets, True, seed, sigma)
                losses.append(loss)
            numeric.append((losses[0] - losses[1]) / (2 * eps))
            analytic.append(grads[name][index])
        analytic = np.array(analytic)
        numeric = np.array(numeric)
        denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
        errors[name] = float(np.linalg.norm(analytic - numeric) / denom) if denom > 0 else 0.0
    return errors


def save_checkpoint(
    net: RegressionNet,
    stem: Union[str, Path],
    epoch: int,
    val_loss: Optional[float],
    seed: int,
) -> Tuple[Path, Path]:
    """Manifeste JSON + poids float32 dans l'ordre déclaré des couches"""
    header = {
        "kind": "regression_net",
        "config": net.config.model_dump(mode="json"),
        "in_channels": net.in_channels,
        "input_shape": list(net.input_shape),
        "init_mode": net.init_mode,
        "dropout_keep": net.dropout_keep,
        "epoch": epoch,
        "val_loss": val_loss,
        "seed": seed,
    }
    ordered = {name: net.params[name] for name in net.parameter_names}
    paths = write_array_bundle(stem, ordered, header=header)
    logger.info(f"💾 Checkpoint écrit: {paths[0]}")
    return paths


def load_checkpoint(stem: Union[str, Path]) -> Tuple[RegressionNet, Dict]:
    if not bundle_paths(stem)[1].exists():
        raise DatasetNotFoundError(f"checkpoint introuvable: {stem}")
    arrays, header = read_array_bundle(stem)
    net = RegressionNet(
        config=NetConfig(**header["config"]),
        in_channels=header["in_channels"],
        input_shape=tuple(header["input_shape"]),
        params=arrays,
        init_mode=header["init_mode"],
        dropout_keep=header["dropout_keep"],
    )
    return net, header
