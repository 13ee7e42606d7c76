"""Exception hierarchy shared by every stage of the pipeline."""


class RainerError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(RainerError, ValueError):
    """Column layout does not match what an operation expects."""


class EmptyInputError(RainerError, ValueError):
    pass


class EmptySchemaError(RainerError, ValueError):
    pass


class UnimputableColumnError(RainerError, ValueError):
    pass


class PlanMismatchError(RainerError, ValueError):
    pass


class ColumnTypeError(RainerError, TypeError):
    pass


class DateParseError(RainerError, ValueError):
    def __init__(self, row, value):
        super().__init__(f"row {row}: cannot parse date {value!r}")
        self.row = row
        self.value = value


class EncodingError(RainerError, ValueError):
    pass


class DegenerateLabelError(RainerError, ValueError):
    pass


class ConstantColumnError(RainerError, ValueError):
    def __init__(self, column):
        super().__init__(f"column {column!r} has zero variance")
        self.column = column


class ConfigurationError(RainerError, ValueError):
    pass


class NumericError(RainerError, ArithmeticError):
    pass


class CalibrationError(NumericError):
    pass


class DomainError(RainerError, ValueError):
    pass


class SpecError(RainerError, ValueError):
    """Invalid model specification or hyperparameter value."""


class SplitError(RainerError, ValueError):
    pass


class UndefinedMetricError(RainerError, ValueError):
    """A metric is undefined for the given input (e.g. a zero denominator)."""


class GridSearchError(RainerError):
    """A fit failed during grid search; ``combination`` names the culprit."""

    def __init__(self, combination, cause):
        super().__init__(f"combination {combination}: {type(cause).__name__}: {cause}")
        self.combination = combination
        self.cause = cause
