"""Exception types shared across the package."""


class PagerecError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PagerecError):
    """Invalid configuration or hyperparameter combination."""


class ShapeError(PagerecError):
    """Structural problem: incompatible dimensions, window lengths, layouts."""


class NumericError(PagerecError):
    """Non-finite input or a failed numerical routine."""


class FormatError(PagerecError):
    """Malformed input file (ragged rows, unparsable cells, bad time base)."""


class AllMissingChannel(PagerecError):
    """A channel has no observed sample, so gap filling is impossible."""


class MapeUndefined(PagerecError):
    """Every index was excluded from the MAPE mean (all true values zero)."""
