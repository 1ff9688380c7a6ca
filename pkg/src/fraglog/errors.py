"""Exception types shared across the package."""


class FraglogError(Exception):
    """Base class for package errors."""


class EvaluationError(FraglogError):
    """A numerical evaluation produced a non-finite or inconsistent result."""


class RangeError(FraglogError):
    """A requested value lies beyond the representable/bracketable range."""


class UnsupportedError(FraglogError):
    """The operation is not defined for the given inputs (e.g. infinite moments)."""
