"""
Error hierarchy for the simulator

Every error carries the exit code the CLI reports for it:
2 for configuration / validation problems, 3 for numerical failures.
"""

from typing import Optional


class SpinAmpError(Exception):
    """Base class for all simulator errors"""

    exit_code = 1


class ConfigError(SpinAmpError):
    """Invalid or unknown configuration"""

    exit_code = 2


class InvalidParameterError(SpinAmpError, ValueError):
    """A library call received arguments outside its domain"""

    exit_code = 2


class SizeLimitError(SpinAmpError):
    """Requested size exceeds a memory cap"""

    exit_code = 2


class NumericalError(SpinAmpError):
    """Base class for numerical failures"""

    exit_code = 3


class IntegrationError(NumericalError):
    """Time integration could not meet its tolerance"""

    def __init__(self, message: str, last_good_time: Optional[float] = None):
        if last_good_time is not None:
            message = f"{message} (last good time t={last_good_time!r})"
        super().__init__(message)
        self.last_good_time = last_good_time


class NumericalBreakdownError(NumericalError):
    """Loss of orthogonality in an iterative eigen-solver"""


class InsufficientDataError(NumericalError):
    """Not enough certified points to fit"""


class BoundaryContactError(NumericalError):
    """Excitation front reached the far boundary of a finite lattice"""
