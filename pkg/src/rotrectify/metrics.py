"""Vertical alignment error (VAE) and normalized vertex distance (NVD)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySet
from .geometry import MatchSet, apply_homography, centered_to_top_left


@dataclass(frozen=True)
class MetricReport:
    vae: float
    nvd_left: float
    nvd_right: float
    n_points: int

    @property
    def nvd(self) -> float:
        return 0.5 * (self.nvd_left + self.nvd_right)


def vae(rectified: MatchSet) -> float:
    """Mean absolute difference between left and right y-coordinates."""
    if len(rectified) == 0:
        raise EmptySet("VAE of an empty match set is undefined")
    return float(np.mean(np.abs(rectified.left[:, 1] - rectified.right[:, 1])))


def frame_vertices(dims) -> np.ndarray:
    width, height = dims
    return np.array(
        [[0.0, 0.0], [width - 1.0, 0.0], [0.0, height - 1.0], [width - 1.0, height - 1.0]]
    )


def nvd(H: np.ndarray, dims) -> float:
    """Summed corner displacement of a centered-frame homography over the image diagonal.

    Corners are taken in the top-left frame, ``(0, 0)`` to ``(W-1, H-1)``.
    """
    width, height = dims
    H_tl = centered_to_top_left(np.asarray(H, dtype=float), dims)
    v = frame_vertices(dims)
    moved = apply_homography(H_tl, v)
    d = np.sqrt(np.sum((moved - v) ** 2, axis=1))
    return float(np.sum(d) / math.hypot(width, height))


def report(rectified: MatchSet, H1, H2, dims) -> MetricReport:
    return MetricReport(vae(rectified), nvd(H1, dims), nvd(H2, dims), len(rectified))
