"""Exception types shared across the pipeline."""


class ReadmitError(Exception):
    """Base class for all package errors."""


class ParseError(ReadmitError):
    """A row or file failed schema validation.

    ``line`` is the 1-based physical line in the source file (0 for
    file-level problems such as a bad header).
    """

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class MappingError(ReadmitError):
    """A code-mapping file is malformed (overlaps, unknown names, empty)."""


class ConfigError(ReadmitError):
    """A run configuration is invalid or infeasible."""
