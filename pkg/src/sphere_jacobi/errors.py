"""Exception types raised by the verification engine."""


class JacobiError(Exception):
    """Base class for all engine errors."""


class NonTangentError(JacobiError, ValueError):
    """A vector that must be tangent at a point is not."""


class UnsupportedDimensionError(JacobiError, ValueError):
    pass


class UnsupportedDegreeError(JacobiError, ValueError):
    pass


class CapabilityError(JacobiError):
    """The requested evaluation route is not available for this object."""


class DegenerateInputError(JacobiError):
    """A candidate eigensection vanishes identically on the grid."""


class NotCriticalError(JacobiError):
    """Second-variation formulas were requested at a non-critical object."""


class ConfigError(JacobiError, ValueError):
    pass
