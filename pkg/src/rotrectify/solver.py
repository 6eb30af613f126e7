"""Calibration-free two-point rectification solver.

A rectifying pair is factored as ``H = Hs @ Hy``.  ``Hy`` aligns rows::

    Hy_left  = [[1, 0, 0], [ h21, h22, h23], [ h31, 0, h33]]
    Hy_right = [[1, 0, 0], [-h21, h22, h23], [-h31, 0, h33]]

and ``Hs = [[Sa, +-Sb, 0], [0, 1, 0], [0, 0, 1]]`` is a horizontal shear that
reduces distortion without touching the y-coordinates.  Fixing the scale
with ``h22 * h33 = 1`` leaves two unknowns ``(t1, t2)``, linear in the
coordinates of two correspondences.

Everything on the per-sample path is plain float arithmetic; numpy only
appears when the final 3x3 matrices are assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame, DegenerateSample, ExcessivePerspective, MapsToInfinity

# |det(A)| must exceed this times ||A||_inf^2
DET_RTOL = 1e-9

H22_MODES = ("paper", "unit-mean")


@dataclass(frozen=True)
class SolverSolution:
    t1: float
    t2: float
    conditioning: float


@dataclass(frozen=True)
class HyParams:
    h21: float
    h22: float
    h23: float
    h31: float
    h33: float

    def matrix(self) -> np.ndarray:
        return np.array(
            [[1.0, 0.0, 0.0], [self.h21, self.h22, self.h23], [self.h31, 0.0, self.h33]]
        )

    def apply(self, x: float, y: float) -> tuple[float, float]:
        w = self.h31 * x + self.h33
        if not abs(w) > 1e-12:
            raise MapsToInfinity(0, f"({x}, {y}) maps to the plane at infinity")
        return x / w, (self.h21 * x + self.h22 * y + self.h23) / w


@dataclass(frozen=True)
class ShearParams:
    """Shear coefficients in the sign convention of the side they belong to.

    The right image's homography uses ``-Sb`` in its (1,2) entry, so for a
    mirror-symmetric pair both sides carry identical parameters.
    """

    Sa: float
    Sb: float


def _condition_2x2(a, b, c, d):
    fro2 = a * a + b * b + c * c + d * d
    det = abs(a * d - b * c)
    if det == 0.0:
        return math.inf
    # singular values s1 >= s2 satisfy s1*s2 = det, s1^2 + s2^2 = fro2
    disc = math.sqrt(max(fro2 * fro2 - 4.0 * det * det, 0.0))
    s1 = math.sqrt((fro2 + disc) / 2.0)
    return s1 * s1 / det


def solve_two_point(m1, m2) -> SolverSolution:
    """Solve for ``(t1, t2)`` from two correspondences ``((x1, y1), (x2, y2))``.

    Coordinates must be in the centered frame.  Each correspondence gives one
    linear equation::

        -(x2*y1 + x1*y2) * t1 + (x1 + x2) * t2 = y2 - y1

    Raises :class:`DegenerateSample` when the 2x2 system is (near) singular.
    """
    (xa1, ya1), (xa2, ya2) = m1
    (xb1, yb1), (xb2, yb2) = m2
    a11 = -(xa2 * ya1 + xa1 * ya2)
    a12 = xa1 + xa2
    a21 = -(xb2 * yb1 + xb1 * yb2)
    a22 = xb1 + xb2
    b1 = ya2 - ya1
    b2 = yb2 - yb1
    det = a11 * a22 - a12 * a21
    norm_inf = max(abs(a11) + abs(a12), abs(a21) + abs(a22))
    if not (abs(det) > DET_RTOL * norm_inf * norm_inf):
        raise DegenerateSample(f"det(A)={det:.3g} with ||A||_inf={norm_inf:.3g}")
    t1 = (b1 * a22 - a12 * b2) / det
    t2 = (a11 * b2 - b1 * a21) / det
    return SolverSolution(t1, t2, _condition_2x2(a11, a12, a21, a22))


def pick_h22(t1: float, width: float, mode: str = "paper") -> float:
    """Choose ``h22`` from ``t1`` so the rectified edge heights stay balanced.

    ``paper`` forces the two edge quantities of :func:`edge_lengths` to sum
    to ``2H``; ``unit-mean`` keeps the mean edge height equal to the input
    height, which gives ``h22 = 1`` when there is no perspective term.
    """
    radicand = 4.0 - width * width * t1 * t1
    if not radicand > 0.0:
        raise ExcessivePerspective(f"|t1|={abs(t1):.6g} is not below 2/W={2.0 / width:.6g}")
    if mode == "paper":
        return math.sqrt(radicand / 2.0)
    if mode == "unit-mean":
        return math.sqrt(radicand) / 2.0
    raise ValueError(f"unknown h22 mode {mode!r}; expected one of {H22_MODES}")


def edge_lengths(t1: float, h22: float, dims) -> tuple[float, float]:
    width, height = dims
    if not abs(t1) * width < 2.0:
        raise ExcessivePerspective(f"|t1|={abs(t1):.6g} is not below 2/W={2.0 / width:.6g}")
    left = 2.0 * height * h22 * h22 / (2.0 - t1 * width) - height
    right = 2.0 * height * h22 * h22 / (2.0 + t1 * width) - height
    return left, right


def build_hy_pair(sol: SolverSolution, h22: float, h23: float = 0.0):
    if not h22 > 0:
        raise ValueError(f"h22 must be positive, got {h22}")
    h31 = sol.t1 / h22
    h33 = 1.0 / h22
    h21 = sol.t1 * h23 + sol.t2 * h22
    return HyParams(h21, h22, h23, h31, h33), HyParams(-h21, h22, h23, -h31, h33)


def _shear_for(hy: HyParams, width: float, height: float) -> tuple[float, float]:
    hw, hh = width / 2.0, height / 2.0
    # edge midpoints: top, right, bottom, left
    ax, ay = hy.apply(0.0, -hh)
    bx, by = hy.apply(hw, 0.0)
    cx, cy = hy.apply(0.0, hh)
    dx, dy = hy.apply(-hw, 0.0)
    xu, xv = bx - dx, by - dy
    yu, yv = cx - ax, cy - ay
    cross = xu * yv - xv * yu
    scale = math.hypot(xu, xv) * math.hypot(yu, yv)
    if not abs(cross) > 1e-12 * scale:
        raise DegenerateFrame("warped midpoint vectors are collinear")
    hw2 = width * height
    sa = (height * height * xv * xv + width * width * yv * yv) / (hw2 * -cross)
    sb = (height * height * xu * xv + width * width * yu * yv) / (hw2 * cross)
    if sa < 0:
        sa, sb = -sa, -sb
    return sa, sb


def shear_pair(hy, dims) -> tuple[ShearParams, ShearParams]:
    """Shears that make the warped frame's midlines perpendicular with the input aspect.

    For each image the edge midpoints (at ``+-W/2``, ``+-H/2`` in the centered
    frame) are pushed through its ``Hy``; with ``x`` the left-to-right midline
    and ``y`` the top-to-bottom midline, ``(Sa, Sb)`` is chosen so that after
    shearing ``x . y = 0`` and ``|x|^2 / |y|^2 = W^2 / H^2``, with ``Sa > 0``.
    """
    width, height = dims
    hy_left, hy_right = hy
    sa1, sb1 = _shear_for(hy_left, width, height)
    sa2, sb2 = _shear_for(hy_right, width, height)
    return ShearParams(sa1, sb1), ShearParams(sa2, -sb2)


def shear_matrix(hs: ShearParams, side: str = "left") -> np.ndarray:
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    sb = hs.Sb if side == "left" else -hs.Sb
    return np.array([[hs.Sa, sb, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def compose(hs: ShearParams, hy: HyParams, side: str = "left") -> np.ndarray:
    return shear_matrix(hs, side) @ hy.matrix()


def rectify_from_sample(m1, m2, dims, h22_mode="paper", h23=0.0):
    """Full single-sample chain: solve, pick h22, build Hy, shear, compose."""
    sol = solve_two_point(m1, m2)
    h22 = pick_h22(sol.t1, dims[0], h22_mode)
    hy = build_hy_pair(sol, h22, h23)
    hs = shear_pair(hy, dims)
    return compose(hs[0], hy[0], "left"), compose(hs[1], hy[1], "right")
