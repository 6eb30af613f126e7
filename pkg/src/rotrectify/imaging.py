"""Raster side: PGM I/O, homography warping and a row-wise block matcher.

Homographies passed to this module act on *top-left* pixel coordinates;
use :func:`rotrectify.geometry.centered_to_top_left` to convert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MapsToInfinity
from .geometry import apply_homography, check_invertible


@dataclass(frozen=True)
class GrayImage:
    """Single-channel image; ``pixels`` is ``(height, width)`` uint8 or float."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {self.pixels.shape}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def dims(self) -> tuple[int, int]:
        return (self.width, self.height)


@dataclass(frozen=True)
class DisparityMap:
    values: np.ndarray  # NaN marks an invalid pixel
    max_disparity: int

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def _pgm_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ValueError("truncated PGM header")
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, offset = _pgm_tokens(data, 4)
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported, got {maxval}")
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise ValueError(f"{path}: expected {width * height} pixels, found {len(raster)}")
    return GrayImage(np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy())


def write_pgm(path, img: GrayImage) -> None:
    pixels = img.pixels
    if pixels.dtype != np.uint8:
        pixels = quantize(pixels)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.width} {img.height}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels).tobytes())


def quantize(values: np.ndarray) -> np.ndarray:
    """Round half away from zero and clip into uint8."""
    v = np.asarray(values, dtype=np.float64)
    rounded = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def _bilinear(src: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h, w = src.shape
    inside = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)
    sx = np.where(inside, sx, 0.0)
    sy = np.where(inside, sy, 0.0)
    x0 = np.clip(np.floor(sx).astype(np.intp), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(sy).astype(np.intp), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx - x0
    fy = sy - y0
    a = src[y0, x0]
    b = src[y0, x1]
    c = src[y1, x0]
    d = src[y1, x1]
    top = a + fx * (b - a)
    bottom = c + fx * (d - c)
    return top + fy * (bottom - top), inside


def warp(img: GrayImage, H: np.ndarray, out_dims, offset=(0, 0)) -> GrayImage:
    """Inverse-map ``img`` through ``H``; output pixel ``q`` samples ``H^-1 (q - offset)``.

    Pixels whose source falls outside the input are 0.  uint8 input gives
    uint8 output, anything else stays float64.
    """
    check_invertible(H)
    out_w, out_h = out_dims
    Hinv = np.linalg.inv(H)
    src = img.pixels.astype(np.float64)
    u, v = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    qx = u.ravel() - offset[0]
    qy = v.ravel() - offset[1]
    w = Hinv[2, 0] * qx + Hinv[2, 1] * qy + Hinv[2, 2]
    w = np.where(np.abs(w) > 1e-12, w, np.nan)
    sx = (Hinv[0, 0] * qx + Hinv[0, 1] * qy + Hinv[0, 2]) / w
    sy = (Hinv[1, 0] * qx + Hinv[1, 1] * qy + Hinv[1, 2]) / w
    values, inside = _bilinear(src, sx, sy)
    out = np.where(inside, values, 0.0).reshape(out_h, out_w)
    if img.pixels.dtype == np.uint8:
        return GrayImage(quantize(out))
    return GrayImage(out)


def common_bounds(H1: np.ndarray, H2: np.ndarray, dims):
    """Canvas holding both warped images, plus the offset for each.

    Both images share one offset, so a scene row lands on the same output
    row in both canvases.
    """
    check_invertible(H1)
    check_invertible(H2)
    width, height = dims
    corners = np.array(
        [[0.0, 0.0], [width - 1.0, 0.0], [0.0, height - 1.0], [width - 1.0, height - 1.0]]
    )
    try:
        warped = np.vstack([apply_homography(H1, corners), apply_homography(H2, corners)])
    except MapsToInfinity as exc:
        raise MapsToInfinity(exc.index, "an image corner maps to infinity") from None
    # snap sub-1e-9 float noise so exact integer corners do not grow the canvas
    snapped = np.round(warped, 9)
    x_min, y_min = np.floor(snapped.min(axis=0))
    x_max, y_max = np.ceil(snapped.max(axis=0))
    out_dims = (int(x_max - x_min) + 1, int(y_max - y_min) + 1)
    offset = (-float(x_min), -float(y_min))
    return out_dims, offset, offset


def _box_sum(a: np.ndarray, r: int) -> np.ndarray:
    """Sum over every full ``(2r+1)^2`` window; output shrinks by ``2r`` per axis."""
    k = 2 * r + 1
    c = np.zeros((a.shape[0] + 1, a.shape[1] + 1))
    c[1:, 1:] = np.cumsum(np.cumsum(a, axis=0), axis=1)
    return c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]


def block_disparity(left: GrayImage, right: GrayImage, block: int, max_disp: int) -> DisparityMap:
    """SAD block matching along rows with a left-right consistency check.

    A left pixel at column ``x`` matched with disparity ``d`` corresponds to
    right column ``x - d``.  Ties go to the smallest disparity.  Pixels whose
    window leaves either image, or whose two directional matches disagree by
    more than one pixel, are NaN.
    """
    if left.dims != right.dims:
        raise DimensionMismatch(f"left is {left.dims}, right is {right.dims}")
    if block < 3 or block % 2 == 0:
        raise ValueError(f"block must be odd and >= 3, got {block}")
    if max_disp < 0:
        raise ValueError(f"max_disp must be >= 0, got {max_disp}")
    L = left.pixels.astype(np.float64)
    R = right.pixels.astype(np.float64)
    h, w = L.shape
    r = block // 2
    best_l = np.full((h, w), np.inf)
    disp_l = np.zeros((h, w), dtype=np.int64)
    best_r = np.full((h, w), np.inf)
    disp_r = np.zeros((h, w), dtype=np.int64)
    if h > 2 * r:
        for d in range(max_disp + 1):
            if w - d <= 2 * r:
                break
            # column k of diff pairs left column k+d with right column k
            cost = _box_sum(np.abs(L[:, d:] - R[:, : w - d]), r)
            rows = slice(r, h - r)
            cols_l = slice(d + r, w - r)
            cols_r = slice(r, w - d - r)
            better = cost < best_l[rows, cols_l]
            best_l[rows, cols_l] = np.where(better, cost, best_l[rows, cols_l])
            disp_l[rows, cols_l] = np.where(better, d, disp_l[rows, cols_l])
            better = cost < best_r[rows, cols_r]
            best_r[rows, cols_r] = np.where(better, cost, best_r[rows, cols_r])
            disp_r[rows, cols_r] = np.where(better, d, disp_r[rows, cols_r])

    valid = np.isfinite(best_l)
    ys, xs = np.nonzero(valid)
    xr = xs - disp_l[ys, xs]
    back = disp_r[ys, xr]
    consistent = np.isfinite(best_r[ys, xr]) & (np.abs(back - disp_l[ys, xs]) <= 1)
    values = np.full((h, w), np.nan)
    values[ys[consistent], xs[consistent]] = disp_l[ys[consistent], xs[consistent]]
    return DisparityMap(values, max_disp)


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 255.0) -> float:
    mse = float(np.mean((np.asarray(a, float) - np.asarray(b, float)) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)
