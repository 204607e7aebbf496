"""Exception types. The CLI maps each to a distinct exit code."""


class SNFError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(SNFError, ValueError):
    """Malformed input: a non-bijective image array, bad file field, etc."""


class CapacityError(SNFError):
    """The requested computation exceeds the supported size."""


class PipelineError(SNFError):
    """An analysis stage could not produce its result.

    ``diagnostics`` carries whatever the failing stage measured before giving up.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
