"""Exception types shared across the package."""


class MomentLabError(Exception):
    """Base class for all package errors."""


class BudgetExceededError(MomentLabError):
    """An enumeration would exceed its configured operation budget."""

    def __init__(self, message, estimated=None, budget=None):
        super().__init__(message)
        self.estimated = estimated
        self.budget = budget


class SupportError(MomentLabError):
    """A function violates a required Fourier- or space-support condition.

    ``offending_cube`` carries the first cube found outside the allowed
    region, when known.
    """

    def __init__(self, message, offending_cube=None):
        super().__init__(message)
        self.offending_cube = offending_cube


class VerificationError(MomentLabError):
    """A checked inequality or identity failed at runtime."""
