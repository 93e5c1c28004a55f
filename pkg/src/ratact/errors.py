"""Exception types shared across the package."""


class RatactError(Exception):
    """Base class for all package errors."""


class DimensionError(RatactError):
    """Operand shapes are incompatible."""


class ConfigError(RatactError):
    """Invalid configuration value or unknown configuration key."""


class ContractError(RatactError):
    """An operation was called outside its documented contract."""


class InputError(RatactError):
    """Non-finite or otherwise invalid numeric input."""


class RegistryError(RatactError, KeyError):
    """Unknown name looked up in a registry."""

    def __str__(self):  # KeyError quotes its message; keep it readable
        return Exception.__str__(self)


class ExplosionError(RatactError):
    """Training produced non-finite values or runaway activation outputs.

    ``record`` carries the diagnostic snapshot taken at the failing step so
    callers can log what the network looked like when it blew up.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record
