"""Exception types raised by the simulator."""


class NvReadoutError(Exception):
    """Base class for all package errors."""


class ParameterError(NvReadoutError, ValueError):
    """A model parameter violates its documented constraint."""


class StateError(NvReadoutError, ValueError):
    """A state label or population vector is malformed for the context."""


class AmbiguousStateError(NvReadoutError):
    """No eigenvector carries more than half its weight on the requested label.

    Raised instead of silently guessing a level assignment, e.g. when a
    transition frequency is requested inside an anticrossing window.
    """


class DegenerateSteadyStateError(NvReadoutError):
    """The rate matrix has more than one stationary distribution."""


class NumericalError(NvReadoutError):
    """Propagation produced values outside the tolerated numerical noise."""


class ConfigError(NvReadoutError, ValueError):
    """A config document or CLI flag could not be validated.

    Carries the offending key and, when parsed from a file, the line number.
    """

    def __init__(self, message: str, *, key: str | None = None, line: int | None = None):
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"key '{key}': "
        super().__init__(prefix + message)
        self.key = key
        self.line = line
