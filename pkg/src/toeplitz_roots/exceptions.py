"""Exceptions for toeplitz-roots.

Every exception carries a ``category`` naming the structured error class the
command line reports for it.
"""

from typing import Optional


class ToeplitzRootError(Exception):
    """Base exception for root-construction errors."""
    category = "unsupported-symbol"


class PositivityError(ToeplitzRootError):
    """Exception raised when a Gamma-quotient parameter is not positive."""
    category = "positivity"


class ProperError(ToeplitzRootError):
    """Exception raised when a Mellin transform is not a proper rational fraction."""
    category = "properness"


class UnsupportedSymbolError(ToeplitzRootError):
    """Exception raised for symbols or configurations the pipeline cannot handle."""
    category = "unsupported-symbol"


class AccuracyError(ToeplitzRootError):
    """
    Exception raised when a numerical method misses its tolerance.

    Attributes:
        estimate: Best value reached before giving up
        error_estimate: Error estimate attached to ``estimate``
        node_index: Grid node at which the failure happened, if any
    """
    category = "accuracy"

    def __init__(
        self,
        message: str,
        estimate: Optional[float] = None,
        error_estimate: Optional[float] = None,
        node_index: Optional[int] = None,
    ):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate
        self.node_index = node_index


class DegenerateCalibrationError(AccuracyError):
    """Exception raised when the root constant cannot be calibrated."""
    pass


class RangeError(ToeplitzRootError):
    """Exception raised for arguments outside the domain of an operation."""
    category = "range"


class PoleError(RangeError):
    """Exception raised when a rational Mellin transform is evaluated at a pole."""
    pass
