"""Exception hierarchy shared across the pipeline."""


class ThermolagError(Exception):
    """Base class for data and model errors (CLI exit status 2)."""


class DataError(ThermolagError):
    pass


class MissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"missing required column {column!r}")


class DateGap(DataError):
    def __init__(self, date):
        self.date = date
        super().__init__(f"series has no record for {date}")


class NonNumericCell(DataError):
    def __init__(self, row, col, value=None):
        self.row, self.col = row, col
        super().__init__(f"non-numeric value {value!r} at row {row}, column {col!r}")


class NegativeCount(DataError):
    def __init__(self, row, col):
        self.row, self.col = row, col
        super().__init__(f"negative or non-integral death count at row {row}, column {col!r}")


class InvalidValue(DataError):
    def __init__(self, row, col, value=None):
        self.row, self.col = row, col
        super().__init__(f"value {value!r} out of range at row {row}, column {col!r}")


class UnknownStratum(DataError):
    pass


class EmptySeries(DataError):
    pass


class DegenerateInput(ThermolagError):
    pass


class InvalidSpec(ThermolagError):
    pass


class SeriesTooShort(ThermolagError):
    pass


class ModelError(ThermolagError):
    pass


class SingularDesign(ModelError):
    pass


class NoConvergence(ModelError):
    pass


class AllZeroExposure(ModelError):
    pass


class NonConvergedFit(ModelError):
    pass


class MalformedResults(ThermolagError):
    pass
