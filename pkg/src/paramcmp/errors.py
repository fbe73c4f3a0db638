"""Exception hierarchy.

The CLI maps the two top-level families onto exit codes: ``DataError`` -> 2,
``EstimationError`` -> 3. Usage problems raise ``UsageError`` (exit 1).
"""


class ParamcmpError(Exception):
    """Base class for all package errors."""


class UsageError(ParamcmpError):
    """Bad command line or estimator option string."""


class DataError(ParamcmpError):
    """Problems reading or selecting the data."""


class CsvParseError(DataError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class SchemaError(DataError):
    pass


class PanelError(DataError):
    pass


class FilterError(DataError):
    pass


class EstimationError(ParamcmpError):
    """A model could not be fitted or tested."""


class CollinearityError(EstimationError):
    def __init__(self, message: str, column: str | int | None = None):
        self.column = column
        super().__init__(message)


class DegenerateFitError(EstimationError):
    pass


class BootstrapError(EstimationError):
    pass


class AlignmentError(EstimationError):
    pass
