"""Camera model, latitudinal poses and the calibrated rectifying homographies.

All geometry here works in the *centered* pixel frame, whose origin is the
principal point (assumed at the image center).  Files and rasters use the
*top-left* frame; conversion happens at I/O boundaries only.

Latitudinal motion places two cameras on a sphere around the origin, each
looking radially outward, mirror-symmetric about the plane ``x = 0``::

    R1 = R(alpha, -beta, 0)      R2 = R(-alpha, beta, 0)      t1 = t2 = [0, 0, -1]

with ``R(a, b, c) = Rz(a) @ Ry(b) @ Rx(c)`` and world-to-camera convention
``x_cam = R @ X + t``.  Rotating both views back to the world orientation
(``H = K R^-1 K^-1``) leaves a pure horizontal baseline between them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import FrameMismatch, MapsToInfinity, PointBehindCamera

# z-translation shared by both latitudinal poses
SPHERE_TRANSLATION = np.array([0.0, 0.0, -1.0])


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width < 2 or self.height < 2:
            raise ValueError(f"image must be at least 2x2, got {self.width}x{self.height}")

    @property
    def K(self) -> np.ndarray:
        return np.diag([self.fx, self.fy, 1.0])

    @property
    def dims(self) -> tuple[int, int]:
        return (self.width, self.height)


@dataclass(frozen=True)
class LatitudinalPose:
    """The two motion angles, in radians."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (abs(self.alpha) < math.pi / 2 and abs(self.beta) < math.pi / 2):
            raise ValueError(
                f"|alpha| and |beta| must be below pi/2, got ({self.alpha}, {self.beta})"
            )


@dataclass(frozen=True)
class Pose:
    R: np.ndarray
    t: np.ndarray

    @property
    def center(self) -> np.ndarray:
        return -self.R.T @ self.t


class Frame(str, enum.Enum):
    CENTERED = "centered"
    TOP_LEFT = "top-left"


def principal_point(dims) -> tuple[float, float]:
    """Top-left coordinates of the image center under the pixel-center convention."""
    width, height = dims
    return ((width - 1) / 2.0, (height - 1) / 2.0)


@dataclass(frozen=True)
class MatchSet:
    """Point correspondences ``left[i] <-> right[i]`` tagged with their pixel frame."""

    left: np.ndarray
    right: np.ndarray
    frame: Frame = Frame.CENTERED

    def __post_init__(self):
        left = np.asarray(self.left, dtype=float).reshape(-1, 2)
        right = np.asarray(self.right, dtype=float).reshape(-1, 2)
        if left.shape != right.shape:
            raise ValueError(f"left/right shapes differ: {left.shape} vs {right.shape}")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "frame", Frame(self.frame))

    def __len__(self):
        return len(self.left)

    def subset(self, index) -> MatchSet:
        return MatchSet(self.left[index], self.right[index], self.frame)

    def swapped(self) -> MatchSet:
        return MatchSet(self.right, self.left, self.frame)

    def require(self, frame: Frame) -> None:
        if self.frame != Frame(frame):
            raise FrameMismatch(f"expected {Frame(frame).value} coordinates, got {self.frame.value}")

    def to_centered(self, dims) -> MatchSet:
        if self.frame == Frame.CENTERED:
            return self
        c = np.array(principal_point(dims))
        return MatchSet(self.left - c, self.right - c, Frame.CENTERED)

    def to_top_left(self, dims) -> MatchSet:
        if self.frame == Frame.TOP_LEFT:
            return self
        c = np.array(principal_point(dims))
        return MatchSet(self.left + c, self.right + c, Frame.TOP_LEFT)


def _rz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(b):
    c, s = math.cos(b), math.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rx(g):
    c, s = math.cos(g), math.sin(g)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def euler_rotation(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Return ``Rz(alpha) @ Ry(beta) @ Rx(gamma)`` (yaw, pitch, roll)."""
    angles = (alpha, beta, gamma)
    if not all(math.isfinite(a) for a in angles):
        raise ValueError(f"angles must be finite, got {angles}")
    return _rz(alpha) @ _ry(beta) @ _rx(gamma)


def latitudinal_pose_pair(angles: LatitudinalPose) -> tuple[Pose, Pose]:
    """Poses of the two views under latitudinal motion."""
    t = SPHERE_TRANSLATION.copy()
    pose1 = Pose(euler_rotation(angles.alpha, -angles.beta, 0.0), t)
    pose2 = Pose(euler_rotation(-angles.alpha, angles.beta, 0.0), t.copy())
    return pose1, pose2


def project(P, pose: Pose, K: CameraIntrinsics) -> np.ndarray:
    """Project world points into the centered pixel frame.

    Accepts a single 3-vector or an ``(N, 3)`` array and returns the matching
    ``(2,)`` or ``(N, 2)`` array.  Raises :class:`PointBehindCamera` if any
    point has non-positive camera depth.
    """
    P = np.asarray(P, dtype=float)
    single = P.ndim == 1
    pts = P.reshape(-1, 3)
    cam = pts @ pose.R.T + pose.t
    depth = cam[:, 2]
    bad = np.flatnonzero(~(depth > 0))
    if bad.size:
        raise PointBehindCamera(f"point {int(bad[0])} has camera depth {depth[bad[0]]:.6g}")
    x = K.fx * cam[:, 0] / depth
    y = K.fy * cam[:, 1] / depth
    out = np.column_stack([x, y])
    return out[0] if single else out


def calibrated_rectifying_pair(angles: LatitudinalPose, K: CameraIntrinsics):
    """``H^j = K (R^j)^-1 K^-1`` for both latitudinal views."""
    pose1, pose2 = latitudinal_pose_pair(angles)
    Km = K.K
    Kinv = np.diag([1.0 / K.fx, 1.0 / K.fy, 1.0])
    return Km @ pose1.R.T @ Kinv, Km @ pose2.R.T @ Kinv


def closed_form_rectifying_pair(angles: LatitudinalPose, K: CameraIntrinsics):
    """Entry-wise expansion of :func:`calibrated_rectifying_pair`.

    The second homography is the first conjugated by the x-mirror
    ``diag(-1, 1, 1)``: entries (1,2), (1,3), (2,1), (3,1) change sign.
    """
    ca, sa = math.cos(angles.alpha), math.sin(angles.alpha)
    cb, sb = math.cos(angles.beta), math.sin(angles.beta)
    fx, fy = K.fx, K.fy
    H1 = np.array(
        [
            [cb * ca, fx * cb * sa / fy, fx * sb],
            [-fy * sa / fx, ca, 0.0],
            [-sb * ca / fx, -sb * sa / fy, cb],
        ]
    )
    H2 = np.array(
        [
            [cb * ca, -fx * cb * sa / fy, -fx * sb],
            [fy * sa / fx, ca, 0.0],
            [sb * ca / fx, -sb * sa / fy, cb],
        ]
    )
    return H1, H2


def apply_homography(H: np.ndarray, points, eps: float = 1e-12) -> np.ndarray:
    """Map ``(N, 2)`` points through ``H`` and dehomogenize."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    w = H[2, 0] * pts[:, 0] + H[2, 1] * pts[:, 1] + H[2, 2]
    bad = np.flatnonzero(~(np.abs(w) > eps))
    if bad.size:
        raise MapsToInfinity(int(bad[0]))
    x = (H[0, 0] * pts[:, 0] + H[0, 1] * pts[:, 1] + H[0, 2]) / w
    y = (H[1, 0] * pts[:, 0] + H[1, 1] * pts[:, 1] + H[1, 2]) / w
    return np.column_stack([x, y])


def normalize_homography(H: np.ndarray) -> np.ndarray:
    """Scale so the bottom-right entry is 1 (left unchanged when that entry is ~0)."""
    H = np.asarray(H, dtype=float)
    if abs(H[2, 2]) > 1e-12:
        return H / H[2, 2]
    return H.copy()


def check_invertible(H: np.ndarray, tol: float = 1e-12) -> None:
    d = np.linalg.det(normalize_homography(H))
    if not (abs(d) > tol):
        raise ValueError(f"homography is singular (det={d:.3g})")


def centered_to_top_left(H: np.ndarray, dims) -> np.ndarray:
    """Conjugate a centered-frame homography into the top-left pixel frame."""
    cx, cy = principal_point(dims)
    T = np.array([[1.0, 0.0, cx], [0.0, 1.0, cy], [0.0, 0.0, 1.0]])
    Tinv = np.array([[1.0, 0.0, -cx], [0.0, 1.0, -cy], [0.0, 0.0, 1.0]])
    return T @ H @ Tinv
