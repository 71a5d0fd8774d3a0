"""Exception hierarchy shared by all shapeflow modules."""


class ShapeFlowError(Exception):
    """Base class for every error raised by shapeflow."""


class InvalidInput(ShapeFlowError, ValueError):
    pass


class MetricMismatch(ShapeFlowError, TypeError):
    """The metric kind does not apply to the given shape types."""


class OriginNotInterior(ShapeFlowError, ValueError):
    pass


class TargetTooCoarse(ShapeFlowError, ValueError):
    """Requested mesh size yields fewer than three rings."""


class DegenerateTriangle(ShapeFlowError, ValueError):
    pass


class IterationDivergence(ShapeFlowError, RuntimeError):
    """Eigen-iteration did not reach the residual tolerance."""


class BracketFailure(ShapeFlowError, RuntimeError):
    """No sign change of the shooting residual inside the search interval."""


class ZeroVector(ShapeFlowError, ValueError):
    pass


class AdmissibilityLost(ShapeFlowError, ValueError):
    """A perturbed domain left the admissible class."""


class InvalidSigma(ShapeFlowError, ValueError):
    pass


class ConfigError(ShapeFlowError, ValueError):
    """Malformed experiment configuration; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
