"""Exception hierarchy shared across the package."""


class QMeansError(Exception):
    """Base class for every error raised by this package."""


class NonFiniteInput(QMeansError, ValueError):
    pass


class SingularMatrix(QMeansError, ValueError):
    pass


class RankOutOfRange(QMeansError, ValueError):
    pass


class ZeroRow(QMeansError, ValueError):
    pass


class ZeroVector(QMeansError, ValueError):
    pass


class IndexOutOfRange(QMeansError, IndexError):
    pass


class EmptyTree(QMeansError, ValueError):
    pass


class EmptyInput(QMeansError, ValueError):
    pass


class EmptyCluster(QMeansError, ValueError):
    """A cluster received no points; ``cluster`` holds its index."""

    def __init__(self, cluster, message=None):
        self.cluster = cluster
        super().__init__(message or f"cluster {cluster} is empty")


class KTooLarge(QMeansError, ValueError):
    pass


class EmptyWindow(QMeansError, ValueError):
    pass


class InfeasibleSeparation(QMeansError, ValueError):
    pass


class DomainError(QMeansError, ValueError):
    pass


class LengthMismatch(QMeansError, ValueError):
    pass


class ShapeMismatch(QMeansError, ValueError):
    pass


class ConfigError(QMeansError, ValueError):
    pass


class DataError(QMeansError, ValueError):
    """Base for malformed input files."""


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class RaggedRows(DataError):
    pass


class BadMagic(DataError):
    pass


class CountMismatch(DataError):
    pass


class TruncatedFile(DataError):
    pass
