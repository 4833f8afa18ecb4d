"""Shared exception types."""


class ValidationError(ValueError):
    """Raised when input data violates a schema or invariant.

    The CLI maps this to exit code 2; any other failure exits 1.
    """
