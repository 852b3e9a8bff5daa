"""Shared exception types."""


class RecovnetError(Exception):
    """Base class for package-specific errors."""


class ConfigError(RecovnetError, ValueError):
    """Invalid parameter value or parameter combination."""


class DataError(RecovnetError, ValueError):
    """Malformed or inconsistent input data (units, tables, files)."""
