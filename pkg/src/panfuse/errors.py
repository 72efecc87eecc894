"""Exception hierarchy shared by the library and the CLI.

Exit-code mapping used by the CLI: ConfigError -> 2, DataError -> 3,
NumericalError -> 4.
"""


class PanfuseError(Exception):
    """Base class for all panfuse errors."""

    exit_code = 1


class ConfigError(PanfuseError):
    """Invalid or inconsistent configuration."""

    exit_code = 2


class DataError(PanfuseError):
    """Invalid input data (files, shapes, dtypes)."""

    exit_code = 3


class MissingHeaderError(DataError):
    """Header sidecar not found next to a payload file."""


class HeaderMismatchError(DataError):
    """Header sidecar inconsistent with the payload."""


class TruncatedPayloadError(DataError):
    """Payload file shorter than the header claims."""


class UnknownDtypeError(DataError):
    """Header declares a dtype outside {float32, float64}."""


class NumericalError(PanfuseError):
    """Non-finite values or a degenerate linear system at run time."""

    exit_code = 4
