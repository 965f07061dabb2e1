"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class LcurveError(Exception):
    exit_code = 1


class ConfigError(LcurveError, ValueError):
    """Invalid configuration or argument combination."""

    exit_code = 1


class DomainError(LcurveError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = 1


class UnsupportedVariantError(LcurveError, ValueError):
    exit_code = 1


class DataError(LcurveError, ValueError):
    """Observations violate an invariant (sizes, counts, value range)."""

    exit_code = 2


class ParseError(DataError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class NumericalError(LcurveError, ArithmeticError):
    exit_code = 3


class IllConditionedError(NumericalError):
    """Normal-equation matrix is too close to singular to invert reliably."""


class CovarianceError(NumericalError):
    """Estimator covariance is not positive semidefinite."""
