"""Exception hierarchy shared across the toolkit.

The CLI maps these onto distinct exit codes, so keep the classes stable.
"""


class SurgnavError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ParseError(SurgnavError):
    """An input file could not be parsed."""

    exit_code = 2


class DegenerateLandmarksError(SurgnavError):
    """Fewer than 3 landmarks, or a (near-)collinear configuration."""

    exit_code = 3


class EmptyTraceError(SurgnavError):
    """A trace session produced no usable surface associations."""

    exit_code = 4


class AlignmentRejectedError(SurgnavError):
    """The final surface alignment failed the fitness/RMSE gate."""

    exit_code = 5


class DegenerateInputError(SurgnavError):
    """Geometric input without a well-defined answer (e.g. coincident points)."""
