"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all fraclest errors."""


class RepresentationError(ToolkitError):
    """Field representation does not match what the operation requires."""


class GridMismatchError(ToolkitError):
    """Fields that must share a grid/representation do not."""


class ParameterError(ToolkitError):
    """A numeric parameter is outside its admissible range."""


class UnsupportedFilterWidthError(ToolkitError):
    """Box-filter half-width is not a nonnegative integer number of cells."""


class NonzeroMeanError(ToolkitError):
    """Operation requires a mean-free field but the input has a nonzero mean."""


class DegenerateFieldError(ToolkitError):
    """Field is (numerically) constant where variation is required."""


class DegenerateCorrelationError(DegenerateFieldError):
    """One of the correlated fields has zero variance."""


class DegenerateStatisticsError(DegenerateFieldError):
    """Flow statistics are undefined (zero dissipation)."""


class DegenerateTruthError(DegenerateFieldError):
    """A priori truth is identically zero (filter width zero)."""


class SpectrumError(ToolkitError):
    """Requested spectral content cannot be represented on the grid."""


class BlowupError(ToolkitError):
    """Time integration produced non-finite values.

    Attributes
    ----------
    last_stable_time : float
        Simulation time of the last finite state.
    """

    def __init__(self, message, last_stable_time):
        super().__init__(message)
        self.last_stable_time = last_stable_time


class SurrogateFitError(ToolkitError):
    """Kriging system remained singular after nugget escalation."""


class SurrogateDataError(ToolkitError):
    """Kriging training data is inconsistent (duplicate inputs, conflicting outputs)."""


class FileFormatError(ToolkitError):
    """A field file failed header validation."""
