"""Exception hierarchy shared across the pipeline."""


class AutocorError(Exception):
    """Base class for every error raised by this package."""


class CoincidentPoints(AutocorError, ValueError):
    pass


class OutOfBounds(AutocorError, ValueError):
    pass


class WrongChannelCount(AutocorError, ValueError):
    pass


class InvalidParams(AutocorError, ValueError):
    pass


class BadIndex(AutocorError, IndexError):
    pass


class EmptyContourList(AutocorError):
    pass


class EmptyPatch(AutocorError):
    pass


class LandmarkError(AutocorError):
    """A landmark could not be located; ``row`` names the offending scan row."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class NoEdgePixels(LandmarkError):
    pass


class CortexTooNarrow(LandmarkError):
    pass


class InvariantViolation(AutocorError):
    pass


class DegenerateDiameter(AutocorError):
    pass


class InfeasibleGeometry(AutocorError):
    pass


class TooFewObservations(AutocorError, ValueError):
    pass


class ZeroVariance(AutocorError, ValueError):
    pass


class NOutOfRange(AutocorError, ValueError):
    pass


class KeyMismatch(AutocorError):
    pass


class MissingColumn(AutocorError):
    pass


class DegenerateHistogram(UserWarning):
    """Warning: every pixel has the same value, so any threshold is optimal."""


class TooFewColors(UserWarning):
    """Warning: fewer distinct colors than requested clusters."""
