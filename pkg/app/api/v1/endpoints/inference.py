"""Routes d'inférence"""
import logging

from fastapi import APIRouter, Depends

from app.api.deps import get_pipeline, get_settings_dep
from app.core.config import Settings
from app.datasets.regions import load_gray_png
from app.pipeline.inference import DssPipeline
from app.schemas.dataset import DetectionStubRecord, InferenceResult

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("", response_model=InferenceResult)
def infer(
    record: DetectionStubRecord,
    pipeline: DssPipeline = Depends(get_pipeline),
    settings: Settings = Depends(get_settings_dep),
):
    """Points clés et activité pour chaque boîte ; chemin d'image relatif au fichier de boîtes"""
    if not record.boxes:
        return InferenceResult(image=record.image)
    image = load_gray_png(settings.boxes_path.parent / record.image)
    result, stats = pipeline.infer(image, record.boxes, record.image)
    logger.info(f"📊 {record.image}: {stats.regions} régions, {stats.regions_per_second:.1f} régions/s")
    return result
