"""Exception hierarchy for whitex.

All whitex-specific failures derive from :class:`WhitexError`. Classes that
signal bad input values also derive from :class:`ValueError` so callers using
generic ``except ValueError`` handling keep working.
"""


class WhitexError(Exception):
    """Base class for all whitex errors."""


class ValidationError(WhitexError, ValueError):
    """Input fails a structural precondition (shape, finiteness, emptiness)."""


class FormatError(WhitexError, ValueError):
    """A file or byte stream is not in the expected format."""


class ParseError(FormatError):
    """A cell or token could not be parsed; message carries row/column."""


class IntegrityError(WhitexError, ValueError):
    """A persisted model bundle violates its internal consistency checks."""


class DomainError(WhitexError, ValueError):
    """A value lies outside the mathematical domain of the operation."""


class DegenerateSampleError(WhitexError, ValueError):
    """A sample is degenerate (zero variance / constant) for the statistic."""


class GeometryError(WhitexError, ValueError):
    """A geometric precondition fails (e.g. near-collinear interpolation)."""


class NumericalError(WhitexError, ArithmeticError):
    """A numerical routine failed to converge or produced unusable output."""
