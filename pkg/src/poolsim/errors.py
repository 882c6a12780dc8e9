"""Exception types shared across the toolkit."""


class PoolsimError(Exception):
    """Base class for all toolkit errors."""


class ParseError(PoolsimError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ValidationError(PoolsimError):
    """Structurally well-formed input that violates a domain invariant."""
