"""Exception types shared across the package.

Plain ``ValueError`` is raised for local argument/precondition violations in
pure functions; the classes here mark failures that callers (notably the CLI)
dispatch on.
"""


class ToolkitError(Exception):
    """Base class for structured toolkit failures."""


class ConfigError(ToolkitError):
    """Bad configuration or scenario input: unknown key, wrong type, bad value."""


class DatasetFormatError(ToolkitError):
    """Malformed dataset file.  Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ModelError(ToolkitError):
    """A model-level failure: no peak found, non-physical fit, target out of range."""
