"""Shared exception types."""


class DialsegError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(DialsegError):
    """A parse error in one of the supported file formats.

    Carries an optional 1-based line number so callers can report the
    offending input location.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
