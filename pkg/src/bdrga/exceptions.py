"""Exception types raised across the package."""


class BdrgaError(Exception):
    """Base class for all errors raised by bdrga."""


class DataError(BdrgaError, ValueError):
    pass


class MissingFile(DataError, FileNotFoundError):
    pass


class ParseError(DataError):
    def __init__(self, row, column, message):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column}: {message}")


class SchemaError(DataError):
    pass


class EmptyData(DataError):
    pass


class RatioOutOfRange(BdrgaError, ValueError):
    pass


class DimensionMismatch(BdrgaError, ValueError):
    pass


class EmptyBatch(BdrgaError, ValueError):
    pass


class TooFewPoints(BdrgaError, ValueError):
    pass


class KTooLarge(BdrgaError, ValueError):
    pass


class EmptySample(BdrgaError, ValueError):
    pass


class ValueOutOfRange(BdrgaError, ValueError):
    pass


class DegenerateX(BdrgaError, ValueError):
    pass
