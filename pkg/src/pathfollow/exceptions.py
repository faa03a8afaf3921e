"""Exception types raised across the package."""


class PathFollowError(Exception):
    """Base class for all errors raised by ``pathfollow``."""


class OutOfDomain(PathFollowError, ValueError):
    """Path parameter outside the path domain with clamping disabled."""


class DegenerateTangent(PathFollowError, ArithmeticError):
    """The path derivative vanishes, so tangent and curvature are undefined."""


class AmbiguousProjection(PathFollowError):
    """Two distinct path points are (numerically) equally close to the query."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class ProjectionSingularity(PathFollowError, ArithmeticError):
    """The orthogonal-projection speed is singular (y1 approaches 1/kappa)."""


class NonFinite(PathFollowError, FloatingPointError):
    """A NaN or Inf appeared in a state or input."""


class RankDeficient(PathFollowError, ValueError):
    """Thrust allocation matrix does not have full row rank."""


class SingularDelta(PathFollowError, ValueError):
    """Body-frame offset gives a non-invertible input matrix (eps_1 == 0)."""


class UnstablePoles(PathFollowError, ValueError):
    """Requested observer poles are not strictly in the left half-plane."""


class ParseError(PathFollowError, ValueError):
    """Scenario document could not be parsed; ``field`` locates the problem."""

    def __init__(self, message, field=""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class ValidationError(PathFollowError, ValueError):
    """Scenario document parsed but is semantically invalid."""

    def __init__(self, message, field=""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
