from app.pose.metrics import BODY_PART_GROUPS, REGION_GROUPS, PckCurve, pck_at_d, pck_curve
from app.pose.skeleton import (
    ANGLE_VECTOR_LENGTH,
    EDGES,
    JOINT_PAIRS,
    KEYPOINT_NAMES,
    AngleVector,
    KeypointSet,
    Skeleton,
    angle_features,
    angle_vector_header,
    build_skeleton,
    decode_keypoints,
    encode_keypoints,
    orientation_vector,
    to_image,
    to_region,
)

__all__ = [
    "ANGLE_VECTOR_LENGTH",
    "AngleVector",
    "BODY_PART_GROUPS",
    "EDGES",
    "JOINT_PAIRS",
    "KEYPOINT_NAMES",
    "KeypointSet",
    "PckCurve",
    "REGION_GROUPS",
    "Skeleton",
    "angle_features",
    "angle_vector_header",
    "build_skeleton",
    "decode_keypoints",
    "encode_keypoints",
    "orientation_vector",
    "pck_at_d",
    "pck_curve",
    "to_image",
    "to_region",
]
