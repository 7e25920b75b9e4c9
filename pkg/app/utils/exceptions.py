"""
Error hierarchy
Every failure raised by the simulator derives from NlclawError
"""

from typing import Optional


class NlclawError(Exception):
    """Base class for all simulator errors"""


class DomainError(NlclawError, ValueError):
    """
    A density (or density range) lies outside the validity
    interval of a velocity model
    """


class KernelMismatch(NlclawError):
    """An operation was requested for a kernel family that does not support it"""


class CellCollapse(NlclawError):
    """
    A Lagrangian step would invert or collapse a cell,
    or push a cell value outside the data range.
    Signals that dt was too large.
    """


class MissingAssumption(NlclawError):
    """The velocity model does not satisfy the hypotheses a check relies on"""


class NonConcave(NlclawError):
    """The flux changes concavity between the two Riemann states"""


class DegenerateFit(NlclawError):
    """A log-log fit was requested on data containing zeros or too few points"""


class ParseError(NlclawError):
    """
    Config document could not be parsed
    Carries the 1-based line number when known
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.message = message
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{message}")
