"""Dépendances communes pour les routes API"""
from fastapi import HTTPException, Request, status

from app.core.config import Settings
from app.pipeline.inference import DssPipeline


def get_settings_dep(request: Request) -> Settings:
    return request.app.state.settings


def get_pipeline(request: Request) -> DssPipeline:
    """Pipeline chargé au démarrage ; 503 tant que les modèles manquent"""
    pipeline = getattr(request.app.state, "pipeline", None)
    if pipeline is None:
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="Modèles non chargés (lancez train-pose et train-svm)"
        )
    return pipeline
