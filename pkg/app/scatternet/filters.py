"""Banc de filtres DTCWT (near_sym_b au niveau 1, qshift_b aux niveaux suivants)"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import dtcwt
import numpy as np
from dtcwt.coeffs import biort as load_biort, qshift as load_qshift

logger = logging.getLogger(__name__)

DEFAULT_BIORT = "near_sym_b"
DEFAULT_QSHIFT = "qshift_b"

FilterPair = Tuple[np.ndarray, np.ndarray]  # (arbre a, arbre b)


def _frozen(values) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64).ravel().copy()
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class DtcwtFilterBank:
    """Filtres d'analyse et de synthèse de la DTCWT 2D

    Le niveau 1 utilise une paire biorthogonale quasi symétrique (13/19 coefficients),
    partagée par les deux arbres. Les niveaux >= 2 utilisent les filtres
    "quarter-shift" : le filtre de l'arbre b est le renversé de celui de l'arbre a.
    """
    biort_name: str
    qshift_name: str
    level1_lowpass: np.ndarray
    level1_highpass: np.ndarray
    level1_synthesis_lowpass: np.ndarray
    level1_synthesis_highpass: np.ndarray
    qshift_lowpass: FilterPair
    qshift_highpass: FilterPair
    qshift_synthesis_lowpass: FilterPair
    qshift_synthesis_highpass: FilterPair

    @property
    def biort(self) -> Tuple[np.ndarray, ...]:
        """Filtres niveau 1 au format (h0o, g0o, h1o, g1o) de dtcwt"""
        return tuple(f[:, np.newaxis] for f in (
            self.level1_lowpass, self.level1_synthesis_lowpass,
            self.level1_highpass, self.level1_synthesis_highpass,
        ))

    @property
    def qshift(self) -> Tuple[np.ndarray, ...]:
        """Filtres q-shift au format (h0a, h0b, g0a, g0b, h1a, h1b, g1a, g1b) de dtcwt"""
        filters = (
            *self.qshift_lowpass, *self.qshift_synthesis_lowpass,
            *self.qshift_highpass, *self.qshift_synthesis_highpass,
        )
        return tuple(f[:, np.newaxis] for f in filters)

    def transform(self) -> dtcwt.Transform2d:
        return dtcwt.Transform2d(biort=self.biort, qshift=self.qshift)


@lru_cache(maxsize=None)
def build_filter_bank(biort_name: str = DEFAULT_BIORT, qshift_name: str = DEFAULT_QSHIFT) -> DtcwtFilterBank:
    """Construire le banc de filtres (déterministe, mis en cache)"""
    h0o, g0o, h1o, g1o = load_biort(biort_name)
    h0a, h0b, g0a, g0b, h1a, h1b, g1a, g1b = load_qshift(qshift_name)
    logger.debug(
        f"Banc DTCWT {biort_name}/{qshift_name}: "
        f"niveau 1 {len(np.ravel(h0o))}/{len(np.ravel(h1o))} coefficients, q-shift {len(np.ravel(h0a))}"
    )
    return DtcwtFilterBank(
        biort_name=biort_name,
        qshift_name=qshift_name,
        level1_lowpass=_frozen(h0o),
        level1_highpass=_frozen(h1o),
        level1_synthesis_lowpass=_frozen(g0o),
        level1_synthesis_highpass=_frozen(g1o),
        qshift_lowpass=(_frozen(h0a), _frozen(h0b)),
        qshift_highpass=(_frozen(h1a), _frozen(h1b)),
        qshift_synthesis_lowpass=(_frozen(g0a), _frozen(g0b)),
        qshift_synthesis_highpass=(_frozen(g1a), _frozen(g1b)),
    )
