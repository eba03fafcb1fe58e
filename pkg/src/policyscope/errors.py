"""Exception hierarchy shared by all pipeline stages.

Every error is either a ``validation`` error (bad input, caller can fix) or a
``runtime`` error (the computation itself failed); the CLI maps the category
to its exit code.
"""
from __future__ import annotations


class PolicyscopeError(Exception):
    """Base class for all errors raised by this package."""

    category = "runtime"


class ParseError(PolicyscopeError):
    """Malformed input file; carries the offending 1-based line number."""

    category = "validation"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(PolicyscopeError):
    """Structurally valid input violating a domain invariant."""

    category = "validation"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AlignmentError(PolicyscopeError):
    """Case and policy series have no overlapping date range."""

    category = "validation"


class ParameterError(PolicyscopeError):
    """An operation was called with an out-of-contract parameter."""

    category = "validation"


class UnknownCountryError(PolicyscopeError):
    """Lookup of a country absent from the data or clustering result."""

    category = "validation"


class EstimatorError(PolicyscopeError):
    """Reproduction-number estimation cannot proceed."""


class NumericError(PolicyscopeError):
    """A numeric quantity became NaN or infinite."""


class ShapeError(PolicyscopeError):
    """Tensor/vector dimensions inconsistent with the operation."""

    category = "validation"


class DatasetError(PolicyscopeError):
    """Supervised dataset construction failed."""

    category = "validation"


class TrainingError(PolicyscopeError):
    """Model training diverged or could not start."""


class ForecastError(PolicyscopeError):
    """Rolling forecast lacks required history or schedule."""

    category = "validation"
