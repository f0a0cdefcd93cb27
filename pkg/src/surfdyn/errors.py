"""Exception hierarchy shared by every module of the package."""


class SurfdynError(Exception):
    """Base class for all errors raised by surfdyn."""


class ChartEscapeError(SurfdynError):
    """A point left the affine chart (or the realized window) of a model."""


class FiberDegeneracyError(SurfdynError):
    """The coordinate quadratic of a Wehler involution degenerated."""


class WindowExhaustedError(SurfdynError):
    """An operation needed symbols or orbit data outside the realized window."""


class DegenerateSplittingError(SurfdynError):
    """The estimated stable and unstable subspaces are (nearly) parallel."""


class NonConvergenceError(SurfdynError):
    """An iterative limit did not settle within its budget."""


class GraphTransformDivergence(SurfdynError):
    """The graph transform produced a slope above the admissible cap."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class RadiusCollapseError(SurfdynError):
    """A Lyapunov chart radius fell below the usable threshold."""


class InsufficientDataError(SurfdynError):
    """Not enough samples, pairs or scales for a statistical estimate."""


class ConfigError(SurfdynError):
    """An experiment or model definition failed validation."""
