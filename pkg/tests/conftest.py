import numpy as np
import pytest

from rotrectify.geometry import CameraIntrinsics, LatitudinalPose, MatchSet, Frame

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_latitudinal_scene(rng, n=50, alpha=None, beta=None, fx=None, fy=None, dims=(960, 720)):
    """Noiseless correspondences of random points in front of both latitudinal views.

    Built straight from rotation matrices and a homogeneous projection so it
    does not share code with the library's projection path.
    """
    alpha = rng.uniform(-0.4, 0.4) if alpha is None else alpha
    beta = rng.uniform(-0.4, 0.4) if beta is None else beta
    fx = rng.uniform(400, 1200) if fx is None else fx
    fy = rng.uniform(400, 1200) if fy is None else fy

    def rz(a):
        return np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1.0]])

    def ry(b):
        return np.array([[np.cos(b), 0, np.sin(b)], [0, 1.0, 0], [-np.sin(b), 0, np.cos(b)]])

    K = np.diag([fx, fy, 1.0])
    P1 = K @ np.hstack([rz(alpha) @ ry(-beta), [[0], [0], [-1.0]]])
    P2 = K @ np.hstack([rz(-alpha) @ ry(beta), [[0], [0], [-1.0]]])
    pts = []
    while len(pts) < n:
        X = np.append(rng.uniform([-3000, -3000, 500], [3000, 3000, 20000]), 1.0)
        a, b = P1 @ X, P2 @ X
        if a[2] <= 0 or b[2] <= 0:
            continue
        p, q = a[:2] / a[2], b[:2] / b[2]
        half = np.array(dims) / 2.0
        if np.all(np.abs(p) < half) and np.all(np.abs(q) < half):
            pts.append((p, q))
    left = np.array([p for p, _ in pts])
    right = np.array([q for _, q in pts])
    return (
        MatchSet(left, right, Frame.CENTERED),
        LatitudinalPose(alpha, beta),
        CameraIntrinsics(fx, fy, dims[0], dims[1]),
    )
