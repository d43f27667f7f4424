"""Exception hierarchy. Every error carries a stable ``code`` string and the
process exit status the CLI maps it to."""


class HFMError(Exception):
    code = "error"
    exit_status = 1


class ConfigError(HFMError):
    code = "config_error"
    exit_status = 2


class DataError(HFMError):
    code = "data_error"
    exit_status = 3


class DimensionMismatchError(DataError):
    code = "dimension_mismatch"


class NonFiniteInputError(DataError):
    code = "non_finite_input"


class MissingPredictionsError(DataError):
    code = "missing_predictions"


class ZeroDistanceError(DataError):
    code = "zero_distance"


class DegenerateAttributeError(DataError):
    code = "degenerate_attribute"
    exit_status = 4
