"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class CicError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(CicError, ValueError):
    """Invalid parameters or configuration (bad width, R < 2, ...)."""


class ContractError(CicError, ValueError):
    """An operation was called outside its preconditions."""


class DesignError(CicError):
    """A filter design target cannot be met."""


class MeasurementError(CicError):
    """A spectral measurement has nothing left to measure."""


class VerificationError(CicError):
    """A self-check (adder equivalence, netlist replay) failed."""

    exit_code = 3


class SampleIOError(CicError, OSError):
    """Reading or writing a sample / CSV / netlist file failed."""

    exit_code = 2
