"""Exception types shared across the toolkit.

Every error raised on bad user input derives from :class:`AuditError`, so the
CLI can map the whole family to a single exit code and library callers can
catch one type.
"""


class AuditError(Exception):
    """Base class for all toolkit validation errors."""


class SchemaError(AuditError):
    """A CSV file does not have the expected column layout."""


class RowError(AuditError):
    """A CSV data row failed validation.

    Carries the 1-based line number of the offending row.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyDatasetError(AuditError):
    """A dataset contains no records."""


class UnknownGroupError(AuditError):
    """A group label was requested that the dataset does not contain."""


class InsufficientDataError(AuditError):
    """Not enough samples (or groups) for the requested computation."""


class DegenerateDataError(AuditError):
    """Input is structurally valid but degenerate for the computation.

    Examples: a contingency table row with zero total, a constant sample
    handed to a normality test, single-class SVM training data.
    """


class ParameterError(AuditError):
    """A parameter is outside its documented domain."""
