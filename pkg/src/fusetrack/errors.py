"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid tracker or tool configuration."""


class ParseError(ValueError):
    """Malformed input file content."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DataError(ValueError):
    """Inputs that parse individually but are mutually inconsistent."""
