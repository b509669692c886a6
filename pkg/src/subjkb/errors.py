"""Exception types shared across the package."""


class SubjkbError(Exception):
    """Base class for all package errors."""


class ParseError(SubjkbError):
    """A line of an input file could not be parsed."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class StructuralError(SubjkbError):
    """Input parsed but violates a structural constraint (cycles, id clashes, contradictions)."""


class NotFoundError(SubjkbError):
    """A referenced entity or class is not present in the knowledge base."""


class InsufficientDataError(SubjkbError):
    """An aggregation was requested over an empty answer set."""


class ConfigurationError(SubjkbError):
    """A config or scenario file is missing required information."""


class SchemaMismatchError(SubjkbError):
    """Feature vectors do not match the schema a model was trained with."""
