"""Exception types shared across the package."""


class MmcalError(Exception):
    """Base class for all mmcal errors."""


class DimensionError(MmcalError):
    """Operand shapes or precisions are incompatible."""


class SingularMatrixError(MmcalError):
    """Matrix is singular to working precision."""


class RankDeficientError(MmcalError):
    """Matrix does not have the required full rank."""


class DegenerateDenominatorError(MmcalError):
    """A quadratic-form denominator fell below its relative floor."""


class ParseError(MmcalError):
    """A file could not be parsed.

    ``offset`` is the byte position at which parsing failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
