"""
Exceptions raised by the deficiency toolkit.

Input invariant violations (bad probabilities, duplicate labels, partial maps)
raise django.core.exceptions.ValidationError like any Django model would.
The classes below cover everything else.
"""


class LecamError(Exception):
    """Base class for toolkit errors."""


class DimensionError(LecamError, ValueError):
    """Outcome or parameter lists of two objects do not line up."""


class GuardError(LecamError):
    """A size guard refused to run an exponential enumeration."""


class PropertyFailure(LecamError):
    """A verified inequality or identity was falsified.

    The offending report travels with the exception so callers can still
    print the evidence.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NestingViolation(PropertyFailure):
    """The equivalence hierarchy did not nest on an instance."""
