"""Couches numpy du réseau de régression (passe avant + rétropropagation exacte)

Chaque fonction `*_forward` renvoie (sortie, cache) ; la `*_backward` correspondante
prend le gradient de la sortie et le cache.
Tenseurs au format (batch, canaux, lignes, colonnes).
"""
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import convolve1d


def conv2d_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> Tuple[np.ndarray, tuple]:
    """Convolution 'same' (padding k//2, pas 1) ; weight (F, C, k, k)"""
    pad = weight.shape[-1] // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(padded, weight.shape[-2:], axis=(2, 3))
    out = np.einsum("nchwij,fcij->nfhw", windows, weight, optimize=True)
    out += bias[None, :, None, None]
    return out, (x.shape, windows, weight, pad)


def conv2d_backward(dout: np.ndarray, cache: tuple) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x_shape, windows, weight, pad = cache
    dweight = np.einsum("nfhw,nchwij->fcij", dout, windows, optimize=True)
    dbias = dout.sum(axis=(0, 2, 3))

    rows, cols = x_shape[2], x_shape[3]
    dpadded = np.zeros((x_shape[0], x_shape[1], rows + 2 * pad, cols + 2 * pad))
    kr, kc = weight.shape[-2:]
    for i in range(kr):
        for j in range(kc):
            dpadded[:, :, i:i + rows, j:j + cols] += np.einsum(
                "nfhw,fc->nchw", dout, weight[:, :, i, j], optimize=True
            )
    dx = dpadded[:, :, pad:pad + rows, pad:pad + cols]
    return dx, dweight, dbias


def relu_forward(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mask = x > 0
    return x * mask, mask


def relu_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask


def lrn_forward(
    x: np.ndarray, size: int, alpha: float, beta: float, k: float
) -> Tuple[np.ndarray, tuple]:
    """Normalisation locale inter-canaux : x / (k + α Σ x²)^β sur `size` canaux voisins"""
    window = np.ones(size)
    denom = k + alpha * convolve1d(x * x, window, axis=1, mode="constant")
    out = x * denom ** (-beta)
    return out, (x, denom, size, alpha, beta)


def lrn_backward(dout: np.ndarray, cache: tuple) -> np.ndarray:
    x, denom, size, alpha, beta = cache
    scaled = dout * x * denom ** (-beta - 1.0)
    spread = convolve1d(scaled, np.ones(size), axis=1, mode="constant")
    return dout * denom ** (-beta) - 2.0 * alpha * beta * x * spread


def maxpool_forward(x: np.ndarray) -> Tuple[np.ndarray, tuple]:
    """Max-pooling 2×2, pas 2 (les lignes/colonnes impaires finales sont ignorées)"""
    n, c, rows, cols = x.shape
    r2, c2 = rows // 2, cols // 2
    blocks = x[:, :, :2 * r2, :2 * c2].reshape(n, c, r2, 2, c2, 2)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, r2, c2, 4)
    argmax = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, argmax[..., None], axis=-1)[..., 0]
    return out, (x.shape, argmax)


def maxpool_backward(dout: np.ndarray, cache: tuple) -> np.ndarray:
    x_shape, argmax = cache
    n, c, rows, cols = x_shape
    r2, c2 = argmax.shape[2], argmax.shape[3]
    dblocks = np.zeros((n, c, r2, c2, 4))
    np.put_along_axis(dblocks, argmax[..., None], dout[..., None], axis=-1)
    dblocks = dblocks.reshape(n, c, r2, c2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    dx = np.zeros(x_shape)
    dx[:, :, :2 * r2, :2 * c2] = dblocks.reshape(n, c, 2 * r2, 2 * c2)
    return dx


def dense_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> Tuple[np.ndarray, tuple]:
    """y = x Wᵀ + b ; weight (sorties, entrées)"""
    return x @ weight.T + bias, (x, weight)


def dense_backward(dout: np.ndarray, cache: tuple) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, weight = cache
    return dout @ weight, dout.T @ x, dout.sum(axis=0)


def dropout_forward(
    x: np.ndarray, keep: float, train_mode: bool, rng: np.random.Generator = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Entraînement : masque de Bernoulli(keep) ; inférence : mise à l'échelle par keep"""
    if train_mode:
        mask = (rng.random(x.shape) < keep).astype(x.dtype)
    else:
        mask = np.full(x.shape, keep)
    return x * mask, mask


def dropout_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask
