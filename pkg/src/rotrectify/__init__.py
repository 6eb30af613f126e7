"""Stereo rectification for uncalibrated cameras under latitudinal motion."""

from .geometry import (
    CameraIntrinsics,
    Frame,
    LatitudinalPose,
    MatchSet,
    Pose,
    calibrated_rectifying_pair,
    latitudinal_pose_pair,
    project,
)
from .metrics import nvd, vae
from .pipeline import RansacConfig, RectificationResult, apply_to_matches, estimate

__all__ = [
    "CameraIntrinsics",
    "Frame",
    "LatitudinalPose",
    "MatchSet",
    "Pose",
    "RansacConfig",
    "RectificationResult",
    "apply_to_matches",
    "calibrated_rectifying_pair",
    "estimate",
    "latitudinal_pose_pair",
    "nvd",
    "project",
    "vae",
]
