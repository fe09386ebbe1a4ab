"""Exception taxonomy for the eegboost pipeline.

Every stage raises a specific subclass so the CLI can map failures to
exit codes (config problems vs. data problems vs. numeric divergence).
"""


class EegboostError(Exception):
    """Base class for all eegboost errors."""


class ConfigError(EegboostError):
    """Invalid configuration value (bad hyperparameter, malformed config file)."""


class SpecError(ConfigError):
    """Invalid generator or split specification."""


class DataError(EegboostError):
    """Base class for problems with input data."""


class SchemaError(DataError):
    """CSV header does not match the expected column layout."""


class ParseError(DataError):
    """A CSV cell or label could not be interpreted; names the offending row."""


class SplitError(DataError):
    """Train/test split would leave one side empty."""


class DimensionError(DataError):
    """Vector or matrix shapes do not line up."""


class LabelError(DataError):
    """A class label falls outside the configured range."""


class InputError(DataError):
    """Malformed metric input (length mismatch, out-of-range value, empty matrix)."""


class InsufficientDataError(DataError):
    """Not enough samples in a (class, subject) cell for pairwise statistics."""


class DegenerateFeatureError(DataError):
    """A feature column has no usable spread for the chosen normalization."""


class UndefinedCorrelationError(DataError):
    """Correlation of a constant vector is undefined."""


class UndefinedAucError(DataError):
    """AUC needs at least one positive and one negative sample."""


class NumericError(EegboostError):
    """Base class for numeric failures during training."""


class DivergenceError(NumericError):
    """Training produced a non-finite loss; names the iteration."""


class DegenerateError(NumericError):
    """A closed-form expression hit a non-positive denominator."""
