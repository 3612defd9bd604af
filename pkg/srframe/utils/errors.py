"""
Exceptions raised by srframe.

Entity invariants are checked by pydantic validators and surface as ``pydantic.ValidationError``;
the classes below cover runtime conditions that callers are expected to tell apart.
"""

__all__ = [
    "SrFrameError",
    "DimensionMismatchError",
    "EmptyMaskError",
    "DegenerateConfigurationError",
    "SolverError",
    "SolverDivergenceError",
    "DatasetError",
    "MissingFileError",
    "MalformedFileError",
    "SizeMismatchError",
]


class SrFrameError(Exception):
    """Base class of every srframe error."""


class DimensionMismatchError(SrFrameError, ValueError):
    """Two grids that must share a domain do not."""


class EmptyMaskError(SrFrameError, ValueError):
    """An operation needs at least one valid pixel and got none."""


class DegenerateConfigurationError(SrFrameError):
    """The energy has no valid residual to sum over."""


class SolverError(SrFrameError):
    """A block update produced a non-finite linear system."""


class SolverDivergenceError(SolverError):
    """
    A pyramid level ended with a non-finite energy.

    Attributes
    ----------
    level : int
        Index of the failing level.
    state : SceneEstimate | None
        Estimate of the last level that finished with a finite energy.
    """

    def __init__(self, message: str, level: int, state=None):
        super().__init__(message)
        self.level = level
        self.state = state


class DatasetError(SrFrameError):
    """
    A dataset file could not be read or written.

    Attributes
    ----------
    path : str
        File the error refers to.
    """

    def __init__(self, path, message: str):
        super().__init__(f"{path}: {message}")
        self.path = str(path)


class MissingFileError(DatasetError, FileNotFoundError):
    pass


class MalformedFileError(DatasetError):
    pass


class SizeMismatchError(DatasetError):
    pass
