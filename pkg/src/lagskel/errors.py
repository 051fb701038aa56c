"""Exception hierarchy shared by every lagskel module."""


class LagskelError(Exception):
    """Base class for all errors raised by lagskel."""


class DimensionError(LagskelError, ValueError):
    """A vector does not have the length the problem requires."""


class DomainError(LagskelError, ValueError):
    """A multiplier vector lies outside the search box."""


class SubmodularityError(LagskelError, ValueError):
    """A mincut backend was handed a non-submodular energy."""


class UnsupportedDirectionError(LagskelError, ValueError):
    """A boundary-type constraint carries a negative disagreement weight."""


class UnsupportedDimensionError(LagskelError, ValueError):
    """Geometry requested in more dimensions than the skeleton supports."""


class CapacityError(LagskelError, ValueError):
    """Exhaustive enumeration requested on too many variables."""


class ConfigurationError(LagskelError):
    """An oracle cannot be built for the requested box / backend."""


class InfeasibleError(LagskelError):
    """The oracle's solution space is empty (e.g. no s-t path)."""


class InvariantViolation(LagskelError, RuntimeError):
    """Internal geometric state is inconsistent. Indicates a bug."""


class ParseError(LagskelError, ValueError):
    """A problem file could not be parsed or validated."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self):
        base = super().__str__()
        if self.line is not None:
            return f"line {self.line}, column {self.column}: {base}"
        return base


class BudgetExceeded(LagskelError):
    """The oracle-call budget ran out; ``partial`` holds what was found so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
