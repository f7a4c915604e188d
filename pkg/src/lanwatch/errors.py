"""Exception types shared across the package."""


class LanwatchError(Exception):
    """Base class for all lanwatch errors."""


class SchemaError(LanwatchError):
    """CSV header does not match the expected column set."""


class ParseError(LanwatchError):
    """A field could not be converted to a number."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ValidationError(LanwatchError):
    """A parsed row violates a record invariant."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class EmptyStreamError(LanwatchError):
    """Merging produced a stream with no records."""


class NoFullWindowError(LanwatchError):
    """The time span is shorter than one window width."""


class InsufficientDataError(LanwatchError):
    """Too few points for the requested computation."""


class ScenarioError(LanwatchError):
    """A synthetic scenario file is malformed."""
