"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input object violates a structural invariant (non-unit vector,
    non-orthogonal frame, malformed config, ...)."""


class PreconditionError(ValueError):
    """A call violates a documented precondition (grid too small,
    mismatched degree bounds, radius out of range, ...)."""


class DomainError(ValueError):
    """A scalar argument lies outside the mathematical domain of the
    function being evaluated."""
