"""Exception types raised across the package."""


class RectificationError(Exception):
    """Base class for every error raised by rotrectify."""


class PointBehindCamera(RectificationError):
    pass


class FrameMismatch(RectificationError):
    """Points from different pixel frames were combined."""


class DegenerateSample(RectificationError):
    """The two sampled correspondences do not determine a solution."""


class ExcessivePerspective(RectificationError):
    """|t1| >= 2/W, so the distortion rule has no real solution."""


class DegenerateFrame(RectificationError):
    """The warped edge-midpoint vectors are collinear."""


class NotEnoughMatches(RectificationError):
    pass


class AllSamplesDegenerate(RectificationError):
    pass


class MapsToInfinity(RectificationError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"point {index} maps to the plane at infinity")


class EmptySet(RectificationError):
    pass


class UnrealizableScene(RectificationError):
    pass


class DimensionMismatch(RectificationError):
    pass
