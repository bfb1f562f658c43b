from app.datasets.annotations import (
    boxes_from_annotations,
    load_annotations,
    load_boxes,
    save_annotations,
    save_boxes,
)
from app.datasets.regions import (
    REGION_HEIGHT,
    REGION_WIDTH,
    RegionSet,
    crop_region,
    extract_regions,
    load_gray_png,
    save_gray_png,
)
from app.datasets.splits import ACTIVITY_PROPORTIONS, POSE_PROPORTIONS, DatasetSplit, split
from app.datasets.synthetic import (
    POSE_TEMPLATES,
    ActivityPose,
    RenderedFigure,
    generate_dataset,
    render_stick_figure,
    sample_activity_pose,
)

__all__ = [
    "ACTIVITY_PROPORTIONS",
    "ActivityPose",
    "DatasetSplit",
    "POSE_PROPORTIONS",
    "POSE_TEMPLATES",
    "REGION_HEIGHT",
    "REGION_WIDTH",
    "RegionSet",
    "RenderedFigure",
    "boxes_from_annotations",
    "crop_region",
    "extract_regions",
    "generate_dataset",
    "load_annotations",
    "load_boxes",
    "load_gray_png",
    "render_stick_figure",
    "sample_activity_pose",
    "save_annotations",
    "save_boxes",
    "save_gray_png",
    "split",
]
