"""Exception types shared across the package.

The three roots map onto process exit codes (and service error kinds):
ConfigError -> 2 ("usage"), DataError -> 3 ("data"), NumericError -> 4 ("numeric").
"""


class MpcanetError(Exception):
    kind = "error"
    exit_code = 1


class ConfigError(MpcanetError):
    """Invalid configuration or command usage."""

    kind = "usage"
    exit_code = 2


class DataError(MpcanetError):
    """Problems with input files, manifests, or shape mismatches against data."""

    kind = "data"
    exit_code = 3


class TensorFormatError(DataError):
    """Corrupt or malformed tensor file."""


class ModelFormatError(DataError):
    """Corrupt or malformed model file."""


class NumericError(MpcanetError):
    """A numeric procedure cannot produce a usable result."""

    kind = "numeric"
    exit_code = 4


class ZeroVarianceError(NumericError):
    """Training data carries no variance, so no dictionary can be learned."""
