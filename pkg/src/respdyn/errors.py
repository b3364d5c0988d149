"""Package-specific error types."""


class UnsupportedSizeError(ValueError):
    """Raised when an exhaustive computation is requested for an infeasible size."""


class CapacityError(RuntimeError):
    """Raised when a requested structure would exceed the configured memory cap."""


class InsufficientDataError(RuntimeError):
    """Raised when a conditional estimate has no conditioning events."""


class ReportIOError(RuntimeError):
    """Raised when a report cannot be written; message carries the path."""
