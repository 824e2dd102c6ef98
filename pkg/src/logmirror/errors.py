"""Exception hierarchy shared by the engine and the command line."""


class LogMirrorError(Exception):
    """Base class for all engine errors."""

    exit_code = 1


class InputError(LogMirrorError):
    """Malformed input: bad JSON, duplicate rays, dangling cone indices..."""

    exit_code = 1


class ValidationFailure(LogMirrorError):
    """The fan is well formed but is not smooth, complete or projective."""

    exit_code = 2

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ModelError(LogMirrorError):
    """A theorem-level invariant failed (nilpotency, flatness, freeness...).

    These are never expected for valid input and indicate a bug upstream.
    """

    exit_code = 3


class BoundExceeded(LogMirrorError):
    """An element falls outside the weight/truncation bounds of a table."""

    exit_code = 3


class InconsistentSystem(ModelError):
    def __init__(self, message, stratum=None):
        super().__init__(message if stratum is None else f"{message} [stratum {stratum}]")
        self.stratum = stratum
