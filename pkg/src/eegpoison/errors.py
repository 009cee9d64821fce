"""Exception hierarchy.

``DataError`` subclasses signal bad input files or datasets (CLI exit code 2);
everything else derives from ``EEGPoisonError`` and maps to a runtime failure.
"""


class EEGPoisonError(Exception):
    pass


class DataError(EEGPoisonError):
    pass


class MissingColumn(DataError):
    def __init__(self, column):
        super().__init__(f"missing required column {column!r}")
        self.column = column


class BadLabel(DataError):
    def __init__(self, row, value):
        super().__init__(f"row {row}: unknown risk label {value!r}")
        self.row = row
        self.value = value


class BadNumber(DataError):
    def __init__(self, row, column, value):
        super().__init__(f"row {row}, column {column!r}: bad numeric value {value!r}")
        self.row = row
        self.column = column
        self.value = value


class EmptyFile(DataError):
    pass


class DegenerateClass(DataError):
    pass


class EmptyTrainingSet(EEGPoisonError):
    pass


class DimensionMismatch(EEGPoisonError):
    pass


class LengthMismatch(EEGPoisonError):
    pass


class EmptyInput(EEGPoisonError):
    pass


class EmptyMatrix(EEGPoisonError):
    pass


class MissingResults(EEGPoisonError):
    pass


class CellTimeout(EEGPoisonError):
    pass


class ConfigError(EEGPoisonError):
    pass


class AllZero(EEGPoisonError):
    pass
