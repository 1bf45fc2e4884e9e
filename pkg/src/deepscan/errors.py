"""Exception taxonomy shared across the package."""


class DeepscanError(Exception):
    """Base class for all package errors."""


class InvalidInputError(DeepscanError):
    """An argument violates a documented precondition."""


class EmptyMaskError(InvalidInputError):
    """A mask-consuming operation received an all-zero mask."""


class TransportError(DeepscanError):
    """A remote expert backend could not be reached or timed out."""


class ProtocolError(DeepscanError):
    """A remote expert backend returned a malformed or inconsistent payload."""


class GenerationError(DeepscanError):
    """Synthetic scene generation could not satisfy its placement constraints."""


class BenchSchemaError(DeepscanError):
    """A benchmark file failed schema validation.

    Carries the 1-based line number of the offending record when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PipelineError(DeepscanError):
    """A pipeline run aborted; carries the partial trace for diagnostics."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
