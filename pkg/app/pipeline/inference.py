"""Inférence de bout en bout : boîtes → points clés → activité"""
import logging
import time
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from skimage.draw import line_aa

from app.core.config import Settings
from app.datasets.regions import crop_region
from app.network.model import RegressionNet, load_checkpoint, predict_keypoints
from app.pipeline.features import resolve_scatter_config, scatter_regions
from app.pose.skeleton import EDGES, angle_features, decode_keypoints, to_image
from app.scatternet.filters import DtcwtFilterBank, build_filter_bank
from app.schemas.dataset import Box, InferenceResult, PersonResult
from app.schemas.scatter import ScatterConfig
from app.svm.multiclass import SvmModel, load_svm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InferenceStats:
    regions: int
    seconds: float

    @property
    def regions_per_second(self) -> float:
        return self.regions / self.seconds if self.seconds > 0 else 0.0


@dataclass(frozen=True, eq=False)
class DssPipeline:
    """Modèles chargés ; immuable, utilisable depuis plusieurs requêtes"""
    net: RegressionNet
    svm: SvmModel
    scatter_config: ScatterConfig
    bank: DtcwtFilterBank
    region_width: int = 120
    region_height: int = 80

    @classmethod
    def load(cls, settings: Settings) -> "DssPipeline":
        net, _ = load_checkpoint(settings.pose_checkpoint)
        svm = load_svm(settings.svm_model_path)
        logger.info(f"✅ Modèles chargés depuis {settings.models_dir}")
        return cls(
            net=net,
            svm=svm,
            scatter_config=resolve_scatter_config(settings.scatter, settings.scatter_calibration_path),
            bank=build_filter_bank(),
            region_width=settings.region_width,
            region_height=settings.region_height,
        )

    def estimate_poses(self, regions: Sequence[np.ndarray]) -> np.ndarray:
        """Points clés (N, 14, 2) en pixels de région"""
        if len(regions) == 0:
            return np.zeros((0, 14, 2))
        features = scatter_regions(regions, self.bank, self.scatter_config)
        outputs = predict_keypoints(self.net, features)
        return np.stack([
            decode_keypoints(v, self.region_width, self.region_height).points for v in outputs
        ])

    def classify(self, keypoints: np.ndarray) -> np.ndarray:
        if len(keypoints) == 0:
            return np.array([], dtype=object)
        angles = np.stack([angle_features(points) for points in keypoints])
        return self.svm.predict(angles)

    def infer(
        self, image: np.ndarray, boxes: Sequence[Box], image_name: str
    ) -> Tuple[InferenceResult, InferenceStats]:
        start = time.perf_counter()
        regions, kept, skipped = [], [], []
        for box in boxes:
            result = crop_region(image, box, self.region_width, self.region_height)
            if result is None:
                logger.warning(f"⚠️ {image_name}: boîte {tuple(box)} hors de l'image, ignorée")
                skipped.append(tuple(box))
                continue
            region, cropped_box = result
            regions.append(region)
            kept.append(cropped_box)

        keypoints = self.estimate_poses(regions)
        labels = self.classify(keypoints)
        persons: List[PersonResult] = []
        for box, points, label in zip(kept, keypoints, labels):
            image_points = to_image(points, box, self.region_width, self.region_height)
            persons.append(PersonResult(
                box=box,
                keypoints=[(float(x), float(y)) for x, y in image_points],
                label=label,
                violent=label != "neutral",
            ))
        stats = InferenceStats(regions=len(kept), seconds=time.perf_counter() - start)
        return InferenceResult(image=image_name, persons=persons, skipped_boxes=skipped), stats


def draw_overlay(image: np.ndarray, result: InferenceResult) -> np.ndarray:
    """Squelettes clairs pour les personnes violentes, sombres sinon"""
    canvas = np.array(image, dtype=np.float64, copy=True)
    rows, cols = canvas.shape
    for person in result.persons:
        value = 1.0 if person.violent else 0.0
        points = np.asarray(person.keypoints)
        for a, b in EDGES:
            (x0, y0), (x1, y1) = points[a], points[b]
            rr, cc, alpha = line_aa(int(round(y0)), int(round(x0)), int(round(y1)), int(round(x1)))
            keep = (rr >= 0) & (rr < rows) & (cc >= 0) & (cc < cols)
            rr, cc, alpha = rr[keep], cc[keep], alpha[keep]
            canvas[rr, cc] = (1 - alpha) * canvas[rr, cc] + alpha * value
    return canvas
