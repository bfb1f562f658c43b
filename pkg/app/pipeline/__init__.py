from app.pipeline.commands import (
    DEFAULT_D_VALUES,
    ActivityReport,
    cmd_eval_activity,
    cmd_eval_pose,
    cmd_generate_data,
    cmd_infer,
    cmd_train_pose,
    cmd_train_priors,
    cmd_train_svm,
    load_regions,
    region_split,
)
from app.pipeline.features import resolve_scatter_config, scatter_regions
from app.pipeline.inference import DssPipeline, InferenceStats, draw_overlay

__all__ = [
    "DEFAULT_D_VALUES",
    "ActivityReport",
    "DssPipeline",
    "InferenceStats",
    "cmd_eval_activity",
    "cmd_eval_pose",
    "cmd_generate_data",
    "cmd_infer",
    "cmd_train_pose",
    "cmd_train_priors",
    "cmd_train_svm",
    "draw_overlay",
    "load_regions",
    "region_split",
    "resolve_scatter_config",
    "scatter_regions",
]
