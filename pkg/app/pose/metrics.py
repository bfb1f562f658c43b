"""Précision des points clés à une distance d (PCK)"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from app.core.errors import ParameterError
from app.pose.skeleton import KEYPOINT_NAMES, KeypointSet

BODY_PART_GROUPS: Dict[str, Tuple[int, ...]] = {
    "head": (0,),
    "neck": (1,),
    "shoulders": (2, 5),
    "elbows": (3, 6),
    "wrists": (4, 7),
    "hips": (8, 11),
    "knees": (9, 12),
    "ankles": (10, 13),
}

REGION_GROUPS: Dict[str, Tuple[int, ...]] = {
    "facial": (0, 1),
    "arms": (2, 3, 4, 5, 6, 7),
    "legs": (8, 9, 10, 11, 12, 13),
}


def pck_at_d(pred: KeypointSet, truth: KeypointSet, d: float) -> Tuple[np.ndarray, float]:
    """Points à une distance <= d du point annoté, et leur proportion"""
    if d < 0:
        raise ParameterError("d doit être positif")
    distances = np.linalg.norm(pred.points - truth.points, axis=1)
    hits = distances <= d
    return hits, float(hits.mean())


@dataclass(frozen=True)
class PckCurve:
    d_values: Tuple[float, ...]
    per_keypoint: np.ndarray  # (len(d), 14)

    @property
    def mean(self) -> np.ndarray:
        return self.per_keypoint.mean(axis=1)

    def group(self, indices: Sequence[int]) -> np.ndarray:
        return self.per_keypoint[:, list(indices)].mean(axis=1)

    def header(self) -> List[str]:
        return (
            ["d"] + list(KEYPOINT_NAMES) + list(BODY_PART_GROUPS)
            + [f"region_{name}" for name in REGION_GROUPS] + ["mean"]
        )

    def rows(self) -> List[list]:
        groups = [self.group(idx) for idx in BODY_PART_GROUPS.values()]
        regions = [self.group(idx) for idx in REGION_GROUPS.values()]
        rows = []
        for i, d in enumerate(self.d_values):
            rows.append(
                [d] + list(self.per_keypoint[i])
                + [g[i] for g in groups] + [r[i] for r in regions] + [self.mean[i]]
            )
        return rows


def pck_curve(preds: np.ndarray, truths: np.ndarray, d_values: Sequence[float]) -> PckCurve:
    """Courbes précision/distance sur un ensemble de personnes ; points (M, 14, 2)"""
    preds = np.asarray(preds, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.float64)
    if preds.shape != truths.shape:
        raise ParameterError(f"formes incompatibles: {preds.shape} vs {truths.shape}")
    if any(d < 0 for d in d_values):
        raise ParameterError("d doit être positif")
    distances = np.linalg.norm(preds - truths, axis=-1)
    if len(distances) == 0:
        per_keypoint = np.zeros((len(d_values), len(KEYPOINT_NAMES)))
    else:
        per_keypoint = np.stack([(distances <= d).mean(axis=0) for d in d_values])
    return PckCurve(tuple(float(d) for d in d_values), per_keypoint)
