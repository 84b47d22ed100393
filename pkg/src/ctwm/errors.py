"""Exception types shared across the package."""


class CtwmError(Exception):
    """Base class for all errors raised by this package."""


class NonSquareError(CtwmError):
    """Raw weight matrix is not square."""


class NegativeEntryError(CtwmError):
    """A weight entry is negative."""

    def __init__(self, row: int, col: int, value: float):
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"negative weight {value!r} at ({row}, {col})")


class ZeroRowError(CtwmError):
    """A row of the raw weight matrix has no positive entry."""

    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} has no positive entry")


class MatrixParseError(CtwmError):
    """A matrix file could not be parsed."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        self.row = row
        self.col = col
        loc = "" if row is None else f" at row {row}" + ("" if col is None else f", column {col}")
        super().__init__(message + loc)


class ConfigError(CtwmError):
    """A configuration record violates its invariants."""


class WeightSumError(CtwmError):
    """Median weights are negative or do not sum to 1 within tolerance."""


class EmptyInputError(CtwmError):
    """An operation received an empty tuple of values."""


class DimensionMismatchError(CtwmError):
    """Vector length does not match the influence matrix size."""


class EmptySetError(CtwmError):
    """Cohesiveness is undefined for the empty node set."""


class NotCohesiveError(CtwmError):
    """The given node set is not cohesive."""


class DegreeTooLargeError(CtwmError):
    """A node's out-degree exceeds the exact subset-search limit."""


class NonFiniteStateError(CtwmError):
    """A state vector is (or became) non-finite; guards internal bugs."""


class IncompleteReportError(CtwmError):
    """A budget-truncated cohesion report cannot back exact pinning answers."""


class MissingRoundError(CtwmError):
    """A prediction references a round that is absent from the dataset."""


class AllZeroDifferencesError(CtwmError):
    """All paired differences are zero; the signed-rank test is undefined."""
