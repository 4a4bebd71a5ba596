"""
Exception hierarchy shared by every dyadic-verify module.
"""


class DyadicError(Exception):
    """Base class for all dyadic-verify errors"""


class InvalidCubeError(DyadicError, ValueError):
    """A cube id does not belong to the grid, or has the wrong level"""


class InvalidFunctionError(DyadicError, ValueError):
    """A leaf function has the wrong shape or violates its positivity flag"""


class ParameterError(DyadicError, ValueError):
    """An exponent constraint of an inequality or operator is violated"""


class CarlesonBoundError(DyadicError):
    """The Carleson norm of a sequence exceeds the requested bound"""

    def __init__(self, message, cube=None, norm=None):
        super().__init__(message)
        self.cube = cube
        self.norm = norm


class AllocationError(DyadicError):
    """A sparse allocation or sparse witness violates its invariants"""


class ConfigError(DyadicError):
    """Malformed run configuration"""
