"""Robust estimation of the rectifying pair from many correspondences.

Each iteration draws two distinct matches, solves for ``(t1, t2)``, builds
the row-aligning pair and scores it by VAE over *all* matches.  The best
candidate is kept; the shear is computed once, for the winner only.

Sample indices are drawn up front from a seeded generator, so iterations
are independent and are evaluated in vectorized chunks.  The chunked
evaluation reproduces the sequential keep-best loop exactly: ties go to
the lowest iteration index and early exit stops after the first iteration
whose score drops below the threshold.

Candidates are scored at unit vertical scale by default.  The distortion
rule makes ``h22`` shrink towards 0 as ``|t1| -> 2/W``, and plain VAE
scales with ``h22**2``; with outliers present the plain score prefers
samples that flatten every row onto one line.  ``score="vae"`` keeps the
plain VAE for comparison.  The reported ``vae`` is always the plain one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import metrics, solver
from .errors import AllSamplesDegenerate, NotEnoughMatches
from .geometry import Frame, MatchSet, apply_homography, check_invertible

_CHUNK = 256

SCORES = ("unit-scale", "vae")


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 1000
    seed: int = 0
    early_exit_vae: float = 0.05
    h23: float = 0.0
    h22_mode: str = "paper"
    min_matches: int = 2
    score: str = "unit-scale"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not self.early_exit_vae >= 0:
            raise ValueError(f"early_exit_vae must be >= 0, got {self.early_exit_vae}")
        if self.min_matches < 2:
            raise ValueError(f"min_matches must be >= 2, got {self.min_matches}")
        if self.h22_mode not in solver.H22_MODES:
            raise ValueError(f"unknown h22 mode {self.h22_mode!r}")
        if self.score not in SCORES:
            raise ValueError(f"unknown score {self.score!r}; expected one of {SCORES}")


@dataclass(frozen=True)
class RectificationResult:
    H1: np.ndarray
    H2: np.ndarray
    vae: float
    nvd_left: float
    nvd_right: float
    iterations_used: int
    sample_indices: tuple[int, int]
    solution: solver.SolverSolution
    hy: tuple[solver.HyParams, solver.HyParams]
    hs: tuple[solver.ShearParams, solver.ShearParams]
    # candidate score per evaluated iteration; inf marks a degenerate sample
    score_trace: np.ndarray = field(repr=False)

    @property
    def nvd(self) -> float:
        return 0.5 * (self.nvd_left + self.nvd_right)


def apply_to_matches(H1, H2, matches: MatchSet) -> MatchSet:
    """Map left points through ``H1`` and right points through ``H2``."""
    return MatchSet(
        apply_homography(H1, matches.left), apply_homography(H2, matches.right), matches.frame
    )


def draw_samples(n: int, iterations: int, seed: int) -> np.ndarray:
    """``(iterations, 2)`` index pairs, distinct within each row."""
    rng = np.random.default_rng(seed)
    first = rng.integers(0, n, size=iterations)
    second = rng.integers(0, n - 1, size=iterations)
    second = second + (second >= first)
    return np.column_stack([first, second])


def _score_chunk(left, right, idx, width, cfg):
    """Candidate score for each sampled pair; inf where the chain fails."""
    i, j = idx[:, 0], idx[:, 1]
    xa1, ya1 = left[i, 0], left[i, 1]
    xa2, ya2 = right[i, 0], right[i, 1]
    xb1, yb1 = left[j, 0], left[j, 1]
    xb2, yb2 = right[j, 0], right[j, 1]
    # same expression order as solver.solve_two_point
    a11 = -(xa2 * ya1 + xa1 * ya2)
    a12 = xa1 + xa2
    a21 = -(xb2 * yb1 + xb1 * yb2)
    a22 = xb1 + xb2
    b1 = ya2 - ya1
    b2 = yb2 - yb1
    det = a11 * a22 - a12 * a21
    norm_inf = np.maximum(np.abs(a11) + np.abs(a12), np.abs(a21) + np.abs(a22))
    ok = np.abs(det) > solver.DET_RTOL * norm_inf * norm_inf
    safe = np.where(ok, det, 1.0)
    t1 = (b1 * a22 - a12 * b2) / safe
    t2 = (a11 * b2 - b1 * a21) / safe

    radicand = 4.0 - width * width * t1 * t1
    ok &= radicand > 0.0
    radicand = np.where(ok, radicand, 1.0)
    if cfg.h22_mode == "paper":
        h22 = np.sqrt(radicand / 2.0)
    else:
        h22 = np.sqrt(radicand) / 2.0
    h23 = cfg.h23
    h31 = t1 / h22
    h33 = 1.0 / h22
    h21 = t1 * h23 + t2 * h22

    xl, yl = left[:, 0][None, :], left[:, 1][None, :]
    xr, yr = right[:, 0][None, :], right[:, 1][None, :]
    h21c, h22c, h31c, h33c = h21[:, None], h22[:, None], h31[:, None], h33[:, None]
    wl = h31c * xl + h33c
    wr = -h31c * xr + h33c
    finite = (np.abs(wl) > 1e-12).all(axis=1) & (np.abs(wr) > 1e-12).all(axis=1)
    ok &= finite
    with np.errstate(divide="ignore", invalid="ignore"):
        yl_t = (h21c * xl + h22c * yl + h23) / wl
        yr_t = (-h21c * xr + h22c * yr + h23) / wr
        scores = np.mean(np.abs(yl_t - yr_t), axis=1)
    if cfg.score == "unit-scale":
        # rectified y differences scale exactly with h22**2
        scores = scores / (h22 * h22)
    ok &= np.isfinite(scores)
    return np.where(ok, scores, np.inf)


def estimate(matches: MatchSet, dims, cfg: RansacConfig | None = None) -> RectificationResult:
    """Estimate the rectifying homography pair for centered-frame matches."""
    cfg = cfg or RansacConfig()
    matches.require(Frame.CENTERED)
    n = len(matches)
    if n < max(2, cfg.min_matches):
        raise NotEnoughMatches(f"need at least {max(2, cfg.min_matches)} matches, got {n}")
    width = float(dims[0])
    samples = draw_samples(n, cfg.iterations, cfg.seed)
    left, right = matches.left, matches.right

    trace = []
    best_score = np.inf
    best_iter = -1
    used = 0
    for start in range(0, cfg.iterations, _CHUNK):
        scores = _score_chunk(left, right, samples[start : start + _CHUNK], width, cfg)
        # first position where the running best falls below the threshold
        below = np.flatnonzero(scores < cfg.early_exit_vae)
        stop = int(below[0]) + 1 if below.size else len(scores)
        scores = scores[:stop]
        trace.append(scores)
        used = start + stop
        k = int(np.argmin(scores))
        if scores[k] < best_score:
            best_score = float(scores[k])
            best_iter = start + k
        if below.size:
            break

    if best_iter < 0:
        raise AllSamplesDegenerate(f"all {used} samples were degenerate")

    i, j = (int(v) for v in samples[best_iter])
    sol = solver.solve_two_point((left[i], right[i]), (left[j], right[j]))
    h22 = solver.pick_h22(sol.t1, width, cfg.h22_mode)
    hy = solver.build_hy_pair(sol, h22, cfg.h23)
    hs = solver.shear_pair(hy, dims)
    H1 = solver.compose(hs[0], hy[0], "left")
    H2 = solver.compose(hs[1], hy[1], "right")
    check_invertible(H1)
    check_invertible(H2)
    rectified = apply_to_matches(H1, H2, matches)
    return RectificationResult(
        H1=H1,
        H2=H2,
        vae=metrics.vae(rectified),
        nvd_left=metrics.nvd(H1, dims),
        nvd_right=metrics.nvd(H2, dims),
        iterations_used=used,
        sample_indices=(i, j),
        solution=sol,
        hy=hy,
        hs=hs,
        score_trace=np.concatenate(trace),
    )

