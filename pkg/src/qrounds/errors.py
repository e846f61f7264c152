"""Exception hierarchy shared by every module."""
import os


class QroundsError(Exception):
    """Base class for all package errors."""


class DomainError(QroundsError, ValueError):
    """An argument is outside the domain of the operation."""


class CapacityError(QroundsError):
    """A size guard was exceeded."""


class ValidationError(QroundsError, ValueError):
    """An object violates one of its invariants beyond tolerance."""


class SamplingError(QroundsError):
    """Rejection sampling ran out of tries."""


class ConfigError(QroundsError, ValueError):
    """An experiment configuration does not match its schema."""


def capacity(name, default):
    """Read a capacity guard, allowing an environment override.

    ``capacity("MAX_VARS", 24)`` looks up ``QROUNDS_MAX_VARS``.
    """
    raw = os.environ.get(f"QROUNDS_{name}")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"QROUNDS_{name} must be an integer, got {raw!r}") from exc
