"""Exception hierarchy shared by every module."""


class SwitchRateError(Exception):
    """Base class for all package errors."""


class InputError(SwitchRateError, ValueError):
    """Malformed or inconsistent user input (dimensions, weights, files)."""


class CertificationError(SwitchRateError):
    """A hypothesis or certificate constant could not be established.

    ``stage`` names the failing step (e.g. ``"m2"`` or ``"subsystem 2"``).
    """

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class NumericalError(SwitchRateError, ArithmeticError):
    """Eigensolver failure, overflow or other floating point breakdown."""


class IntegrationError(NumericalError):
    """ODE integration aborted.

    ``last_time`` / ``last_state`` hold the last finite point reached.
    """

    def __init__(self, message, last_time=None, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state
