"""Schemas Pydantic"""
from app.schemas.activity import ALL_LABELS, VIOLENT_LABELS, ActivityLabel, SvmHyperparams
from app.schemas.dataset import (
    CAPTURE_HEIGHTS_M,
    AnnotationRecord,
    DetectionStubRecord,
    InferenceResult,
    PersonAnnotation,
    PersonResult,
    SyntheticConfig,
)
from app.schemas.network import NUM_KEYPOINTS, NetConfig, PriorConfig, TrainConfig
from app.schemas.scatter import ORIENTATIONS_DEG, ChannelDescriptor, ScatterConfig

__all__ = [
    # Activités
    "ALL_LABELS",
    "VIOLENT_LABELS",
    "ActivityLabel",
    "SvmHyperparams",
    # Annotations
    "CAPTURE_HEIGHTS_M",
    "AnnotationRecord",
    "DetectionStubRecord",
    "InferenceResult",
    "PersonAnnotation",
    "PersonResult",
    "SyntheticConfig",
    # Réseau
    "NUM_KEYPOINTS",
    "NetConfig",
    "PriorConfig",
    "TrainConfig",
    # ScatterNet
    "ORIENTATIONS_DEG",
    "ChannelDescriptor",
    "ScatterConfig",
]
