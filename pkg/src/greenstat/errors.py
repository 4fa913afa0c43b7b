"""Exception types shared across greenstat."""


class GreenstatError(Exception):
    """Base class for every error raised by this package."""


class DataError(GreenstatError):
    """Problems with the input file or dataset structure."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(DataError):
    pass


class ValidationError(DataError, ValueError):
    pass


class AnalysisError(GreenstatError):
    """Raised when a statistical procedure cannot be carried out."""


class DomainError(AnalysisError, ValueError):
    pass


class NumericError(AnalysisError, ArithmeticError):
    pass


class InsufficientDataError(AnalysisError):
    pass


class UndefinedCorrelationError(AnalysisError):
    pass


class GroupingError(AnalysisError):
    pass


class CollinearityError(AnalysisError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"design matrix is rank deficient: column {column!r} "
                         "is a linear combination of the preceding columns")


class MissingInputError(AnalysisError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing input value for predictor {name!r}")
