"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, `DataError`
subclasses exit 2, `IntegrityError` subclasses exit 3.
"""


class InfolabError(Exception):
    pass


class DataError(InfolabError):
    """Malformed or insufficient input data."""


class ParseError(DataError):
    """A line of an input file could not be parsed."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DuplicateIdError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class IntegrityError(InfolabError):
    """An artifact is internally inconsistent (counts, hashes, shapes)."""


class TruncationError(IntegrityError):
    """An input ended before its closing marker."""
