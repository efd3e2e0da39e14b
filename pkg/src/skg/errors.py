"""Exception hierarchy; `exit_code` drives the CLI's process exit status."""


class SkgError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ArgumentError(SkgError, ValueError):
    """Invalid parameter values or mismatched dimensions."""

    exit_code = 2


class DataError(SkgError):
    """Malformed input files, unknown node ids, or inconsistent datasets."""

    exit_code = 3


class DegenerateInputError(SkgError):
    """Formally valid inputs that carry no usable signal (all-zero values, identical vectors)."""

    exit_code = 4


class NumericError(SkgError):
    """Non-finite values or parameters outside a formula's domain."""

    exit_code = 4


class StateError(SkgError):
    """Operation invoked before its prerequisites were computed or retained."""

    exit_code = 4
