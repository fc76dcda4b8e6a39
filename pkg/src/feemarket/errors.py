"""Exception types raised across the package."""


class FeeMarketError(Exception):
    """Base class for all library errors."""


class DomainError(FeeMarketError, ValueError):
    """A parameter lies outside its admissible domain."""


class InvalidBlockSize(FeeMarketError, ValueError):
    """Block size outside [0, k*T]."""


class MissingValuations(FeeMarketError, ValueError):
    """A valuation-conditioned rule was stepped without valuations."""


class NoClearingPrice(FeeMarketError, ValueError):
    """The survival function does not attain 1/lambda on the search bracket."""


class EmptyWindow(FeeMarketError, ValueError):
    """An averaging window contains no samples."""


class UnsupportedRule(FeeMarketError, ValueError):
    """The requested analysis is not defined for this update rule."""


class ParseError(FeeMarketError, ValueError):
    """Malformed input data.

    ``row`` is the 1-based data-row index (header excluded) and ``column``
    the offending column name, when known.
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class InvariantError(FeeMarketError, ValueError):
    """Parsed data violates a structural invariant."""


class ConfigError(FeeMarketError, ValueError):
    """Invalid run configuration (file or flags)."""
