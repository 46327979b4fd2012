"""Exception taxonomy shared by all modules.

Exit-code mapping lives in the CLI: ConfigError -> 3, DataError (and
subclasses) -> 4, anything else -> 5.
"""


class PivotSmtError(Exception):
    pass


class ConfigError(PivotSmtError):
    """Bad configuration: unknown keys, invalid values, missing settings."""


class DataError(PivotSmtError):
    """Bad or inconsistent input data."""


class TrainingError(DataError):
    pass


class SelectionError(DataError):
    pass


class AlignmentError(DataError):
    pass


class ExtractionError(DataError):
    pass


class EvaluationError(DataError):
    pass


class CombinationError(EvaluationError):
    pass


class TuningError(DataError):
    pass
