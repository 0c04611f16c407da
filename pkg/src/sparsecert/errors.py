"""Exception hierarchy."""


class SparseCertError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SparseCertError, ValueError):
    """Operand shapes do not fit together."""


class InvalidMatrixError(SparseCertError, ValueError):
    """Matrix or vector is empty, has the wrong rank, or holds NaN/Inf."""


class AsymmetryError(SparseCertError, ValueError):
    pass


class RankDeficiencyError(SparseCertError, ArithmeticError):
    """A least-squares system has (numerically) dependent columns.

    ``column`` is the offending column position in the matrix handed to the
    solver; OMP additionally fills in ``support`` with the atom indices.
    """

    def __init__(self, message: str, column: int | None = None, support: tuple[int, ...] | None = None):
        super().__init__(message)
        self.column = column
        self.support = support


class NormalizationError(SparseCertError, ValueError):
    """Columns are not unit norm, or a zero column cannot be normalized."""


class CapExceededError(SparseCertError, ValueError):
    """Brute-force enumeration would exceed the combinatorial cap."""


class ConstructionError(SparseCertError, RuntimeError):
    """The boundary counterexample failed one of its own checks."""


class MatrixFormatError(SparseCertError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
