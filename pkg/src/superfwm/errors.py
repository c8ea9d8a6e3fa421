"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SuperFWMError(Exception):
    """Base class for all errors raised by superfwm."""


class InvalidArgumentError(SuperFWMError, ValueError):
    """An argument is outside the domain of the operation."""


class InconsistentQError(InvalidArgumentError):
    """Quality factors imply a negative intrinsic decay rate."""


class LosslessDegenerateError(InvalidArgumentError):
    """The lossless limit was requested where it is singular (Q_i infinite)."""


class SpanTooNarrowError(InvalidArgumentError):
    """A half-maximum crossing lies outside the sampled grid."""


class AmbiguousPeakError(InvalidArgumentError):
    """A spectrum has more than one peak above half maximum."""


class ModeMismatchError(SuperFWMError, TypeError):
    """An operation was called with a pump mode it does not support."""


class DegenerateSourceError(SuperFWMError, ArithmeticError):
    """A source contributes zero brightness on the chosen grid."""


class NoMinimumError(SuperFWMError):
    """The bounded 1-D search did not find an interior minimum."""


class NoResonanceError(SuperFWMError):
    """No resonance dip could be detected in a transmission spectrum."""


class ConfigError(InvalidArgumentError):
    """A scenario configuration field is invalid.

    The offending field is kept in ``field`` (dotted path, e.g.
    ``bands.pump.q_e``) and is prefixed to the message.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DataFormatError(SuperFWMError, ValueError):
    """An input data file could not be parsed."""

    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")
