"""Exception types raised across the package."""


class HeatRecoveryError(Exception):
    """Base class for all errors raised by heatrecovery."""


class GraphError(HeatRecoveryError, ValueError):
    """Invalid graph input."""


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


class SingletonGraph(GraphError):
    pass


class InvalidMetric(GraphError):
    """A user-supplied distance matrix is not compatible with the weights."""


class GraphFileError(GraphError):
    """Malformed graph file; ``lineno`` points at the offending line."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class IndexOutOfRange(HeatRecoveryError, IndexError):
    pass


class EmptySupport(HeatRecoveryError, ValueError):
    pass


class DimensionMismatch(HeatRecoveryError, ValueError):
    pass


class NegativeTime(HeatRecoveryError, ValueError):
    pass


class NonPositiveTime(HeatRecoveryError, ValueError):
    pass


class NonPositiveDistance(HeatRecoveryError, ValueError):
    pass


class EigensolverFailure(HeatRecoveryError, RuntimeError):
    pass


class NumericallySingular(HeatRecoveryError, ArithmeticError):
    """The restricted heat operator cannot be inverted in floating point."""


class ConditionViolated(HeatRecoveryError, ValueError):
    """A sufficient condition required by a bound does not hold."""


class TooLarge(HeatRecoveryError, ValueError):
    pass


class GenerationFailed(HeatRecoveryError, RuntimeError):
    pass


class ConfigInvalid(HeatRecoveryError, ValueError):
    pass


class MaxIterationsWarning(UserWarning):
    """The solver hit its iteration cap; a partial result was returned."""
