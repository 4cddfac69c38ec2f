"""Exception hierarchy shared by all modules."""


class MddRiskError(Exception):
    """Base class for every error raised by this package."""


class ParameterDomainError(MddRiskError, ValueError):
    """A model parameter lies outside its admissible domain."""


class InputError(MddRiskError, ValueError):
    """Input data is empty, too short or otherwise unusable."""


class BranchError(MddRiskError, ValueError):
    """The requested formula branch does not apply to the given drift."""


class RangeError(MddRiskError, ValueError):
    """Argument falls outside a calibrated table and no fallback is allowed."""


class UndefinedRatioError(MddRiskError, ZeroDivisionError):
    """A ratio has a zero denominator (e.g. Calmar of a monotone series)."""


class DegenerateSampleError(MddRiskError, ValueError):
    """A statistical test received a zero-variance sample."""


class ParseError(MddRiskError, ValueError):
    """A price file could not be parsed; ``row`` is the 1-based data row."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row
