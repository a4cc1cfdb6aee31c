"""Validity checking: scenes, robots, batched kernels and point clouds."""

from .checker import (
    DEFAULT_WIDTH,
    ConfigBatch,
    ValidityChecker,
    available_backends,
    check_batch,
    check_compatibility,
    check_motion,
    default_backend,
    fk_planar_arm,
    is_state_valid,
)
from .scene import (
    PointCloudIndex,
    RobotKind,
    RobotModel,
    Scene,
    build_point_cloud_index,
    load_point_cloud,
    query_point_cloud,
)

__all__ = [
    "DEFAULT_WIDTH", "ConfigBatch", "PointCloudIndex", "RobotKind", "RobotModel", "Scene",
    "ValidityChecker", "available_backends", "build_point_cloud_index", "check_batch",
    "check_compatibility", "check_motion", "default_backend", "fk_planar_arm", "is_state_valid",
    "load_point_cloud", "query_point_cloud",
]
