"""Exception types shared across the package."""


class GoldfishError(Exception):
    """Base class for every error raised by this package."""


class DegenerateConfiguration(GoldfishError):
    """Two interpolation nodes (particle positions) are too close together."""


class ZeroLeadingCoefficient(GoldfishError):
    pass


class UnknownFamily(GoldfishError):
    pass


class UnsupportedFamily(GoldfishError):
    """The requested construction only exists for the goldfish family."""


class InconsistentFamily(GoldfishError):
    """A user-supplied (eta, eta', phi) triple failed its self-consistency sampling."""


class UnknownObservable(GoldfishError):
    pass


class IndexOutOfRange(GoldfishError):
    pass


class TrajectoryCollision(GoldfishError):
    """Particle positions merged during integration.

    ``t`` is the time at which the collision was detected and ``row`` the index
    of the last sample time that was emitted before it.
    """

    def __init__(self, message, t=None, row=None):
        super().__init__(message)
        self.t = t
        self.row = row


class StepSizeUnderflow(GoldfishError):
    """The adaptive step shrank below round-off; ``t`` and ``y`` are the last accepted point."""

    def __init__(self, message, t=None, y=None):
        super().__init__(message)
        self.t = t
        self.y = y


class BranchAmbiguity(GoldfishError):
    pass


class ZeroDeformation(GoldfishError):
    pass


class ZeroH1(GoldfishError):
    pass


class ZeroDenominator(GoldfishError):
    pass


class ContourSingularity(GoldfishError):
    """A straight integration contour from 0 passes through a singular point."""

    def __init__(self, message, k=None, point=None):
        super().__init__(message)
        self.k = k
        self.point = point


class QuadratureFailure(GoldfishError):
    pass


class AmbiguousMatching(UserWarning):
    """Two root assignments are almost equally good (near root collision)."""
