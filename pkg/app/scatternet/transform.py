"""ScatterNet à log paramétrique sur la DTCWT

Couches :
    L0 = x ⋆ φ
    L1 = (log(|x ⋆ ψ_{j,r}| + k_j) − log(k_j)) ⋆ φ
    L2 = ||x ⋆ ψ_{j1,r1}| ⋆ ψ_{j2,r2}| ⋆ φ   (j2 > j1)

Toutes les cartes sont ramenées à la grille moyennée de la résolution 1.0
(H/2^J × W/2^J), puis une bordure d'un échantillon est retirée.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import dtcwt
import numpy as np
from scipy import ndimage
from skimage.transform import resize

from app.core.errors import DimensionError, ParameterError
from app.schemas.scatter import ORIENTATIONS_DEG, ChannelDescriptor, ScatterConfig
from app.scatternet.filters import DtcwtFilterBank
from app.utils.serializers import read_array_bundle, write_array_bundle, write_json

logger = logging.getLogger(__name__)

MIN_IMAGE_SIZE = 16
MIN_LEVEL_SIZE = 8  # support minimal d'un niveau q-shift
SCALE_WEIGHTS = (0.125, 0.75, 0.125)  # lissage en échelle, centré sur l'échelle courante

Grid = np.ndarray
PathKey = Tuple[int, int]  # (échelle j, indice d'orientation r)
SecondLayerKey = Tuple[int, int, int, int]  # (j1, r1, j2, r2)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Image en niveaux de gris, lignes × colonnes"""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionError(f"image 2D attendue, reçu {data.ndim} dimensions")
        if min(data.shape) < MIN_IMAGE_SIZE:
            raise DimensionError(
                f"image trop petite ({data.shape[1]}×{data.shape[0]}), minimum {MIN_IMAGE_SIZE}×{MIN_IMAGE_SIZE}"
            )
        if not np.all(np.isfinite(data)):
            raise ParameterError("l'image contient des valeurs non finies")
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, array: np.ndarray, normalize: bool = True) -> "GrayImage":
        """Créer une image ; normalize centre et réduit les intensités"""
        data = np.asarray(array, dtype=np.float64)
        if normalize:
            data = data - data.mean()
            std = data.std()
            if std > 0:
                data = data / std
        return cls(data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class ComplexSubband:
    """Sous-bande complexe orientée d'un niveau de la DTCWT"""
    scale: int
    orientation: int  # en degrés
    real_part: np.ndarray
    imag_part: np.ndarray

    def __post_init__(self):
        if self.real_part.shape != self.imag_part.shape:
            raise DimensionError("parties réelle et imaginaire de tailles différentes")
        if self.orientation not in ORIENTATIONS_DEG:
            raise ParameterError(f"orientation inconnue: {self.orientation}")

    @property
    def coefficients(self) -> np.ndarray:
        return self.real_part + 1j * self.imag_part


@dataclass(frozen=True, eq=False)
class DtcwtPyramid:
    lowpass: np.ndarray
    levels: Tuple[Tuple[ComplexSubband, ...], ...]
    original_shape: Tuple[int, int]

    def highpasses(self) -> Tuple[np.ndarray, ...]:
        """Sous-bandes au format (h, w, 6) de dtcwt"""
        return tuple(
            np.stack([sb.coefficients for sb in level], axis=-1) for level in self.levels
        )


@dataclass(frozen=True, eq=False)
class ScatterFeatures:
    """Cartes invariantes concaténées (canaux × lignes × colonnes)"""
    channels: Tuple[ChannelDescriptor, ...]
    maps: np.ndarray

    def __post_init__(self):
        maps = np.asarray(self.maps, dtype=np.float64)
        if maps.ndim != 3 or maps.shape[0] != len(self.channels):
            raise DimensionError(
                f"{len(self.channels)} descripteurs pour des cartes de forme {maps.shape}"
            )
        if not np.all(np.isfinite(maps)):
            raise ParameterError("cartes de diffusion non finies")
        if len(set(self.channels)) != len(self.channels):
            raise ParameterError("descripteurs de canaux dupliqués")
        maps = maps.copy()
        maps.flags.writeable = False
        object.__setattr__(self, "maps", maps)

    @property
    def num_channels(self) -> int:
        return len(self.channels)

    def as_tensor(self) -> np.ndarray:
        """Tenseur (canaux, lignes, colonnes) donné au réseau de régression"""
        return np.array(self.maps)

    def with_maps(self, maps: np.ndarray) -> "ScatterFeatures":
        return ScatterFeatures(self.channels, maps)


def _pad_to_multiple(data: np.ndarray, multiple: int) -> np.ndarray:
    rows, cols = data.shape
    pad_rows = (-rows) % multiple
    pad_cols = (-cols) % multiple
    if pad_rows == 0 and pad_cols == 0:
        return data
    return np.pad(data, ((0, pad_rows), (0, pad_cols)), mode="symmetric")


def _as_array(image: Union[GrayImage, np.ndarray]) -> np.ndarray:
    if isinstance(image, GrayImage):
        return image.data
    return np.asarray(image, dtype=np.float64)


def dtcwt_forward(
    image: Union[GrayImage, np.ndarray], bank: DtcwtFilterBank, levels: int
) -> DtcwtPyramid:
    """DTCWT 2D avec extension symétrique jusqu'à un multiple de 2^levels"""
    if levels < 1:
        raise ParameterError("levels doit être >= 1")
    data = _as_array(image)
    original_shape = data.shape
    padded = _pad_to_multiple(data, 2 ** levels)
    coarsest = min(padded.shape) // 2 ** (levels - 1)
    if coarsest < MIN_LEVEL_SIZE:
        raise DimensionError(
            f"grille {padded.shape} trop petite pour {levels} niveaux (support {MIN_LEVEL_SIZE})"
        )

    pyramid = bank.transform().forward(padded, nlevels=levels)
    subbands = []
    for j, highpass in enumerate(pyramid.highpasses, start=1):
        subbands.append(tuple(
            ComplexSubband(
                scale=j,
                orientation=ORIENTATIONS_DEG[r],
                real_part=np.ascontiguousarray(highpass[:, :, r].real),
                imag_part=np.ascontiguousarray(highpass[:, :, r].imag),
            )
            for r in range(len(ORIENTATIONS_DEG))
        ))
    return DtcwtPyramid(
        lowpass=np.asarray(pyramid.lowpass),
        levels=tuple(subbands),
        original_shape=original_shape,
    )


def dtcwt_inverse(pyramid: DtcwtPyramid, bank: DtcwtFilterBank) -> np.ndarray:
    """Reconstruction, recadrée à la taille d'origine"""
    rebuilt = bank.transform().inverse(dtcwt.Pyramid(pyramid.lowpass, pyramid.highpasses()))
    rows, cols = pyramid.original_shape
    return np.asarray(rebuilt)[:rows, :cols]


def complex_modulus(subband: ComplexSubband) -> Grid:
    return np.hypot(subband.real_part, subband.imag_part)


def parametric_log(envelope: Grid, k: float) -> Grid:
    """log(U + k), k > 0

    Les cartes L1 exportées retranchent ensuite log(k) (voir ScatterConfig.log_offsets).
    """
    if k <= 0:
        raise ParameterError(f"k doit être strictement positif (reçu {k})")
    return np.log(np.asarray(envelope, dtype=np.float64) + k)


def local_average(envelope: Grid, averaging_scale: float, stride: int = 1) -> Grid:
    """Moyenne locale gaussienne (σ = averaging_scale échantillons), puis sous-échantillonnage

    Le gain continu vaut 1 et l'extension par réflexion conserve la masse.
    """
    smoothed = ndimage.gaussian_filter(
        np.asarray(envelope, dtype=np.float64), sigma=averaging_scale, mode="reflect"
    )
    if stride > 1:
        smoothed = smoothed[::stride, ::stride]
    return smoothed


def first_layer_envelopes(
    image: Union[GrayImage, np.ndarray], bank: DtcwtFilterBank, num_scales: int
) -> Dict[PathKey, Grid]:
    """Enveloppes U1[j, r] = |x ⋆ ψ_{j,r}| (avant log)"""
    pyramid = dtcwt_forward(image, bank, num_scales)
    return {
        (sb.scale, r): complex_modulus(sb)
        for level in pyramid.levels
        for r, sb in enumerate(level)
    }


def second_layer_envelopes(
    first_layer: Dict[PathKey, Grid], bank: DtcwtFilterBank, num_scales: int
) -> Dict[SecondLayerKey, Grid]:
    """Enveloppes U2[j1, r1, j2, r2] = |U1[j1, r1] ⋆ ψ_{j2,r2}|, j2 > j1"""
    envelopes: Dict[SecondLayerKey, Grid] = {}
    for (j1, r1), envelope in sorted(first_layer.items()):
        depth = num_scales - j1
        if depth < 1:
            continue
        pyramid = dtcwt_forward(envelope, bank, depth)
        for offset, level in enumerate(pyramid.levels, start=1):
            for r2, sb in enumerate(level):
                envelopes[(j1, r1, j1 + offset, r2)] = complex_modulus(sb)
    return envelopes


def second_layer(
    first_layer: Dict[PathKey, Grid], bank: DtcwtFilterBank, config: ScatterConfig
) -> Dict[SecondLayerKey, Grid]:
    """Cartes L2 moyennées, une par chemin (j1, r1) → (j2, r2)"""
    J = config.num_scales
    maps = {}
    for key, envelope in second_layer_envelopes(first_layer, bank, J).items():
        step = 2 ** (J - key[2])
        maps[key] = local_average(envelope, step, stride=step)
    return maps


def resample_image(data: np.ndarray, factor: float, multiple: int = 2) -> np.ndarray:
    """Rééchantillonnage bilinéaire, puis recadrage centré sur un multiple de `multiple`"""
    data = np.asarray(data, dtype=np.float64)
    if factor != 1.0:
        shape = (int(round(data.shape[0] * factor)), int(round(data.shape[1] * factor)))
        data = resize(data, shape, order=1, mode="symmetric", anti_aliasing=False, preserve_range=True)
    rows = data.shape[0] - data.shape[0] % multiple
    cols = data.shape[1] - data.shape[1] % multiple
    top = (data.shape[0] - rows) // 2
    left = (data.shape[1] - cols) // 2
    return data[top:top + rows, left:left + cols]


def _fit_grid(grid: Grid, shape: Tuple[int, int]) -> Grid:
    if grid.shape == shape:
        return grid
    return resize(grid, shape, order=1, mode="edge", anti_aliasing=False, preserve_range=True)


def _scatter_resolution(
    data: np.ndarray, bank: DtcwtFilterBank, config: ScatterConfig
) -> Tuple[List[ChannelDescriptor], List[Grid]]:
    J = config.num_scales
    data = _pad_to_multiple(data, 2 ** J)

    descriptors: List[Tuple[str, Tuple[int, ...], Tuple[int, ...]]] = []
    grids: List[Grid] = []

    descriptors.append(("L0", (), ()))
    grids.append(local_average(data, 2 ** J, stride=2 ** J))

    first = first_layer_envelopes(data, bank, J)
    for (j, r), envelope in sorted(first.items()):
        step = 2 ** (J - j)
        if config.log_all_scales or j == 1:
            k = config.log_offsets[j - 1]
            # log(U + k) − log(k) : une enveloppe nulle donne une carte nulle
            envelope = parametric_log(envelope, k) - np.log(k)
        descriptors.append(("L1", (j,), (ORIENTATIONS_DEG[r],)))
        grids.append(local_average(envelope, step, stride=step))

    for (j1, r1, j2, r2), grid in sorted(second_layer(first, bank, config).items()):
        descriptors.append(("L2", (j1, j2), (ORIENTATIONS_DEG[r1], ORIENTATIONS_DEG[r2])))
        grids.append(grid)

    return descriptors, grids


def scatter(
    image: GrayImage, bank: DtcwtFilterBank, config: Optional[ScatterConfig] = None
) -> ScatterFeatures:
    """Coefficients L0/L1/L2 concaténés sur toutes les résolutions"""
    config = config or ScatterConfig()
    J = config.num_scales
    trim = config.border_trim
    grid_shape = (-(-image.height // 2 ** J), -(-image.width // 2 ** J))
    if grid_shape[0] - 2 * trim < 1 or grid_shape[1] - 2 * trim < 1:
        raise DimensionError(f"grille moyennée {grid_shape} trop petite après la bordure")

    channels: List[ChannelDescriptor] = []
    maps: List[Grid] = []
    for factor in config.resolution_factors:
        data = resample_image(image.data, factor, multiple=2) if factor != 1.0 else image.data
        if min(data.shape) < MIN_IMAGE_SIZE:
            raise DimensionError(f"image rééchantillonnée trop petite: {data.shape}")
        descriptors, grids = _scatter_resolution(data, bank, config)
        for (layer, scales, orientations), grid in zip(descriptors, grids):
            grid = _fit_grid(grid, grid_shape)
            if trim:
                grid = grid[trim:-trim, trim:-trim]
            channels.append(ChannelDescriptor(
                layer=layer, resolution=factor, scales=scales, orientations=orientations,
                rows=grid.shape[0], cols=grid.shape[1],
            ))
            maps.append(grid)

    features = ScatterFeatures(tuple(channels), np.stack(maps))
    if config.joint_invariance_enabled:
        features = joint_invariance(features)
    return features


def joint_invariance(features: ScatterFeatures) -> ScatterFeatures:
    """Lissage conjoint en orientation (cyclique, largeur 3) et en échelle (poids SCALE_WEIGHTS)

    L0 est inchangé. Les cartes L1 sont lissées en orientation puis en échelle,
    les cartes L2 en orientation sur les deux axes (r1, r2).
    """
    maps = np.array(features.maps)
    index = {ch: i for i, ch in enumerate(features.channels)}
    orientation_pos = {o: r for r, o in enumerate(ORIENTATIONS_DEG)}
    n_orient = len(ORIENTATIONS_DEG)

    for resolution in sorted({ch.resolution for ch in features.channels}):
        first = [ch for ch in features.channels if ch.layer == "L1" and ch.resolution == resolution]
        if first:
            scales = sorted({ch.scales[0] for ch in first})
            block = np.zeros((len(scales), n_orient) + maps.shape[1:])
            for ch in first:
                block[scales.index(ch.scales[0]), orientation_pos[ch.orientations[0]]] = maps[index[ch]]
            block = ndimage.uniform_filter1d(block, size=3, axis=1, mode="wrap")
            if len(scales) > 1:
                block = ndimage.correlate1d(block, SCALE_WEIGHTS, axis=0, mode="nearest")
            for ch in first:
                maps[index[ch]] = block[scales.index(ch.scales[0]), orientation_pos[ch.orientations[0]]]

        second = [ch for ch in features.channels if ch.layer == "L2" and ch.resolution == resolution]
        for path in sorted({ch.scales for ch in second}):
            members = [ch for ch in second if ch.scales == path]
            block = np.zeros((n_orient, n_orient) + maps.shape[1:])
            for ch in members:
                r1, r2 = (orientation_pos[o] for o in ch.orientations)
                block[r1, r2] = maps[index[ch]]
            block = ndimage.uniform_filter(block, size=(3, 3, 1, 1), mode="wrap")
            for ch in members:
                r1, r2 = (orientation_pos[o] for o in ch.orientations)
                maps[index[ch]] = block[r1, r2]

    return features.with_maps(maps)


def calibrate_log_offsets(
    images: Iterable[GrayImage], bank: DtcwtFilterBank, config: ScatterConfig, ratio: float = 1e-3
) -> Tuple[float, ...]:
    """k_j = ratio · moyenne de l'enveloppe à l'échelle j sur un jeu d'entraînement"""
    J = config.num_scales
    totals = np.zeros(J)
    counts = np.zeros(J)
    for image in images:
        for (j, _), envelope in first_layer_envelopes(image, bank, J).items():
            totals[j - 1] += envelope.sum()
            counts[j - 1] += envelope.size
    if np.any(counts == 0):
        raise ParameterError("aucune image pour calibrer les offsets du log")
    offsets = tuple(float(max(ratio * t / c, np.finfo(float).tiny)) for t, c in zip(totals, counts))
    logger.info(f"📊 Offsets du log calibrés: {', '.join(f'k_{j + 1}={k:.3e}' for j, k in enumerate(offsets))}")
    return offsets


def save_log_offsets(path: Union[str, Path], offsets: Sequence[float]) -> Path:
    return write_json(path, {"log_offsets": list(offsets)})


def export_features(features: ScatterFeatures, stem: Union[str, Path]) -> Tuple[Path, Path]:
    """Exporter les cartes (float32) avec l'en-tête des canaux"""
    arrays = {f"c{i:03d}": m for i, m in enumerate(features.maps)}
    metadata = {
        f"c{i:03d}": ch.model_dump(mode="json") for i, ch in enumerate(features.channels)
    }
    return write_array_bundle(
        stem, arrays, header={"kind": "scatter_features", "channels": features.num_channels},
        entry_metadata=metadata,
    )


def load_features(stem: Union[str, Path]) -> ScatterFeatures:
    arrays, header = read_array_bundle(stem)
    channels = []
    maps = []
    for entry in header["entries"]:
        channels.append(ChannelDescriptor(
            layer=entry["layer"], resolution=entry["resolution"],
            scales=tuple(entry["scales"]), orientations=tuple(entry["orientations"]),
            rows=entry["rows"], cols=entry["cols"],
        ))
        maps.append(arrays[entry["name"]])
    return ScatterFeatures(tuple(channels), np.stack(maps))
