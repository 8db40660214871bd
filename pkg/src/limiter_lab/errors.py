"""Exception types raised across limiter_lab."""


class LimiterLabError(Exception):
    """Base class for all package errors."""


class ValidationError(LimiterLabError, ValueError):
    """An input violates a documented precondition."""


class FitError(LimiterLabError):
    """A calibration table cannot be fitted."""
