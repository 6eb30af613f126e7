"""Synthetic latitudinal stereo pairs and parameter sweeps.

A scene is a point cloud on the faces of an axis-aligned cube in front of a
pan-tilt camera rotating on a small sphere.  ``roll_deg`` is the pan angle
between the two views and ``pitch_deg`` the common tilt of the camera; the
pair is mirror-symmetric about the pan bisector, so it is re-expressed
exactly as a latitudinal pose pair ``(alpha, beta)`` in a world frame where
the bisector is the z-axis.  The sphere radius is applied by scaling the
scene (metres -> radius units), never the poses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry, metrics, pipeline
from .errors import RectificationError, UnrealizableScene
from .geometry import CameraIntrinsics, Frame, LatitudinalPose, MatchSet

DEFAULT_INTRINSICS = CameraIntrinsics(fx=800.0, fy=800.0, width=960, height=720)
RETRY_FACTOR = 100


@dataclass(frozen=True)
class SceneConfig:
    radius: float = 0.01
    depth_min: float = 0.5
    depth_max: float = 200.0
    roll_deg: float = 10.0
    pitch_deg: float = 30.0
    n_points: int = 50
    noise_px: float = 0.0
    seed: int = 0
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS
    outlier_fraction: float = 0.0

    def __post_init__(self):
        if not (0 < self.depth_min <= self.depth_max):
            raise ValueError(f"need 0 < depth_min <= depth_max, got {self.depth_min}, {self.depth_max}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")
        if not (0 <= self.roll_deg <= 45):
            raise ValueError(f"roll_deg must lie in [0, 45], got {self.roll_deg}")
        if not (0 <= self.pitch_deg <= 90):
            raise ValueError(f"pitch_deg must lie in [0, 90], got {self.pitch_deg}")
        if not self.noise_px >= 0:
            raise ValueError(f"noise_px must be >= 0, got {self.noise_px}")
        if not (0 <= self.outlier_fraction < 1):
            raise ValueError(f"outlier_fraction must lie in [0, 1), got {self.outlier_fraction}")


@dataclass(frozen=True)
class SyntheticPair:
    matches: MatchSet
    clean_matches: MatchSet
    true_poses: tuple[geometry.Pose, geometry.Pose]
    true_homographies: tuple[np.ndarray, np.ndarray]
    angles: LatitudinalPose
    points: np.ndarray  # metres, in the latitudinal world frame
    inlier_mask: np.ndarray
    config: SceneConfig = field(repr=False)

    @property
    def camera_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Camera centers in metres."""
        r = self.config.radius
        return tuple(r * pose.center for pose in self.true_poses)


def latitudinal_angles(roll_deg: float, pitch_deg: float) -> LatitudinalPose:
    """Convert pan separation and tilt into the latitudinal ``(alpha, beta)``.

    Camera 1 has camera-to-world rotation ``Ry(pan/2) @ Rx(tilt)``, camera 2
    the mirror image.  Rotating the world about x so camera 1's optical axis
    has no y-component turns its world-to-camera rotation into
    ``Rz(alpha) @ Ry(-beta)``.
    """
    half_pan = math.radians(roll_deg) / 2.0
    tilt = math.radians(pitch_deg)
    c2w = geometry.euler_rotation(0.0, half_pan, 0.0) @ geometry.euler_rotation(0.0, 0.0, tilt)
    axis = c2w[:, 2]
    psi = math.atan2(axis[1], axis[2])
    G = geometry.euler_rotation(0.0, 0.0, psi)
    R = c2w.T @ G.T
    alpha = math.atan2(-R[0, 1], R[1, 1])
    beta = math.atan2(R[2, 0], R[2, 2])
    return LatitudinalPose(alpha, beta)


def _cube_hits(dirs, depth_min, depth_max, rng):
    """Intersect rays from the origin with the cube; returns points and a hit mask."""
    n = len(dirs)
    if depth_max == depth_min:
        t = depth_min / dirs[:, 2]
        pts = dirs * t[:, None]
        half = depth_min
        hit = (np.abs(pts[:, 0]) <= half) & (np.abs(pts[:, 1]) <= half)
        return pts, hit
    half = (depth_max - depth_min) / 2.0
    lo = np.array([-half, -half, depth_min])
    hi = np.array([half, half, depth_max])
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = lo / dirs
        t1 = hi / dirs
    t_near = np.nanmax(np.minimum(t0, t1), axis=1)
    t_far = np.nanmin(np.maximum(t0, t1), axis=1)
    hit = (t_far >= t_near) & (t_near > 0)
    pick_far = rng.random(n) < 0.5
    t = np.where(pick_far, t_far, t_near)
    return dirs * t[:, None], hit


def _in_frame(p, K):
    half_w = (K.width - 1) / 2.0
    half_h = (K.height - 1) / 2.0
    return (np.abs(p[:, 0]) <= half_w) & (np.abs(p[:, 1]) <= half_h)


def _project_safe(P, pose, K):
    cam = P @ pose.R.T + pose.t
    depth = cam[:, 2]
    ok = depth > 0
    d = np.where(ok, depth, 1.0)
    return np.column_stack([K.fx * cam[:, 0] / d, K.fy * cam[:, 1] / d]), ok


def generate(cfg: SceneConfig) -> SyntheticPair:
    """Sample a noisy correspondence set for one synthetic latitudinal pair."""
    rng = np.random.default_rng(cfg.seed)
    K = cfg.intrinsics
    angles = latitudinal_angles(cfg.roll_deg, cfg.pitch_deg)
    poses = geometry.latitudinal_pose_pair(angles)
    budget = RETRY_FACTOR * cfg.n_points

    kept_pts, kept_1, kept_2 = [], [], []
    n_kept = 0
    attempts = 0
    while n_kept < cfg.n_points:
        if attempts >= budget:
            raise UnrealizableScene(
                f"only {n_kept} of {cfg.n_points} points survived {budget} attempts "
                f"(roll={cfg.roll_deg}, pitch={cfg.pitch_deg})"
            )
        batch = min(max(2 * (cfg.n_points - n_kept), 64), budget - attempts)
        attempts += batch
        # rays through uniformly drawn pixels of a camera at the sphere center
        px = rng.uniform(-(K.width - 1) / 2.0, (K.width - 1) / 2.0, batch)
        py = rng.uniform(-(K.height - 1) / 2.0, (K.height - 1) / 2.0, batch)
        dirs = np.column_stack([px / K.fx, py / K.fy, np.ones(batch)])
        pts, hit = _cube_hits(dirs, cfg.depth_min, cfg.depth_max, rng)
        scaled = pts / cfg.radius
        p1, ok1 = _project_safe(scaled, poses[0], K)
        p2, ok2 = _project_safe(scaled, poses[1], K)
        keep = hit & ok1 & ok2 & _in_frame(p1, K) & _in_frame(p2, K)
        idx = np.flatnonzero(keep)[: cfg.n_points - n_kept]
        kept_pts.append(pts[idx])
        kept_1.append(p1[idx])
        kept_2.append(p2[idx])
        n_kept += len(idx)

    points = np.concatenate(kept_pts)
    clean = MatchSet(np.concatenate(kept_1), np.concatenate(kept_2), Frame.CENTERED)

    left = clean.left.copy()
    right = clean.right.copy()
    inliers = np.ones(cfg.n_points, dtype=bool)
    n_out = int(round(cfg.outlier_fraction * cfg.n_points))
    if n_out:
        which = rng.choice(cfg.n_points, size=n_out, replace=False)
        inliers[which] = False
        right[which, 0] = rng.uniform(-(K.width - 1) / 2.0, (K.width - 1) / 2.0, n_out)
        right[which, 1] = rng.uniform(-(K.height - 1) / 2.0, (K.height - 1) / 2.0, n_out)
    if cfg.noise_px > 0:
        left = left + rng.normal(0.0, cfg.noise_px, left.shape)
        right = right + rng.normal(0.0, cfg.noise_px, right.shape)

    return SyntheticPair(
        matches=MatchSet(left, right, Frame.CENTERED),
        clean_matches=clean,
        true_poses=poses,
        true_homographies=geometry.calibrated_rectifying_pair(angles, K),
        angles=angles,
        points=points,
        inlier_mask=inliers,
        config=cfg,
    )


def standard_grid(n: int = 5, base: SceneConfig | None = None) -> list[SceneConfig]:
    """``n x n x n`` grid over scene depth, roll and pitch.

    Depth ``d`` runs geometrically over [0.5, 100] m and the cube spans
    ``[d, 2d]``, so the whole grid covers 0.5 to 200 m.
    """
    base = base or SceneConfig()
    grid = []
    for d in np.geomspace(0.5, 100.0, n):
        for roll in np.linspace(0.0, 45.0, n):
            for pitch in np.linspace(0.0, 90.0, n):
                grid.append(
                    replace(
                        base,
                        depth_min=float(d),
                        depth_max=float(2 * d),
                        roll_deg=float(roll),
                        pitch_deg=float(pitch),
                    )
                )
    return grid


def trial_seed(master_seed: int, cell: int, trial: int) -> int:
    return int(np.random.SeedSequence([master_seed, cell, trial]).generate_state(1)[0])


SWEEP_FIELDS = (
    "cell",
    "depth_min",
    "depth_max",
    "roll_deg",
    "pitch_deg",
    "noise_px",
    "outlier_fraction",
    "n_points",
    "trials",
    "failed",
    "vae_mean",
    "vae_median",
    "vae_min",
    "vae_max",
    "nvd_mean",
    "nvd_median",
    "nvd_min",
    "nvd_max",
    "status",
)


def _stats(values, prefix):
    if not values:
        return {f"{prefix}_{k}": math.nan for k in ("mean", "median", "min", "max")}
    a = np.asarray(values)
    return {
        f"{prefix}_mean": float(np.mean(a)),
        f"{prefix}_median": float(np.median(a)),
        f"{prefix}_min": float(np.min(a)),
        f"{prefix}_max": float(np.max(a)),
    }


def run_cell(cell: int, cfg: SceneConfig, trials: int, ransac=None, master_seed: int = 0) -> dict:
    ransac = ransac or pipeline.RansacConfig()
    vaes, nvds = [], []
    failed = 0
    last_error = ""
    for trial in range(trials):
        seed = trial_seed(master_seed, cell, trial)
        try:
            pair = generate(replace(cfg, seed=seed))
            result = pipeline.estimate(
                pair.matches, cfg.intrinsics.dims, replace(ransac, seed=seed)
            )
        except RectificationError as exc:
            failed += 1
            last_error = type(exc).__name__
            continue
        vaes.append(result.vae)
        nvds.append(result.nvd)
    row = {
        "cell": cell,
        "depth_min": cfg.depth_min,
        "depth_max": cfg.depth_max,
        "roll_deg": cfg.roll_deg,
        "pitch_deg": cfg.pitch_deg,
        "noise_px": cfg.noise_px,
        "outlier_fraction": cfg.outlier_fraction,
        "n_points": cfg.n_points,
        "trials": trials,
        "failed": failed,
    }
    row.update(_stats(vaes, "vae"))
    row.update(_stats(nvds, "nvd"))
    if failed == 0:
        row["status"] = "ok"
    else:
        row["status"] = f"{'partial' if vaes else 'failed'}:{last_error}"
    return row


def sweep(grid, trials: int, ransac=None, master_seed: int = 0) -> list[dict]:
    """One aggregated row per grid cell; failing cells are marked, not raised."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    return [run_cell(i, cfg, trials, ransac, master_seed) for i, cfg in enumerate(grid)]


def ground_truth_report(pair: SyntheticPair) -> metrics.MetricReport:
    H1, H2 = pair.true_homographies
    dims = pair.config.intrinsics.dims
    rectified = pipeline.apply_to_matches(H1, H2, pair.clean_matches)
    return metrics.report(rectified, H1, H2, dims)
