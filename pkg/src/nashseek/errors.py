"""Exception types raised across the package."""


class NashSeekError(Exception):
    """Base class for all package errors."""


class InvalidGraph(NashSeekError, ValueError):
    """Weight matrix violates the graph invariants."""


class DisconnectedGraph(NashSeekError):
    """Algebraic connectivity is (numerically) zero."""


class DimensionMismatch(NashSeekError, ValueError):
    pass


class NonConvexDetected(NashSeekError):
    """A convexity self-check failed at an evaluation point."""


class MonotonicityViolated(NashSeekError):
    """A sampled pair produced a negative monotonicity quotient."""


class NoConvergence(NashSeekError):
    pass


class ConfigError(NashSeekError, ValueError):
    """Invalid run or scheme configuration."""


class DeltaNotMultipleOfStep(ConfigError):
    pass


class NumericalBlowup(NashSeekError):
    """State magnitude exceeded the divergence threshold.

    The trajectory recorded up to the failing step is attached as
    ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TriggerInvariantError(NashSeekError, AssertionError):
    """Internal trigger variable left the positive half-line."""
