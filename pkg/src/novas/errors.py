"""Exception types shared across the package."""


class NovasError(Exception):
    """Base class for package-specific errors."""


class ConstantColumn(NovasError):
    """A covariate column has zero sample standard deviation."""

    def __init__(self, column: int, name: str | None = None):
        self.column = column
        self.name = name
        label = str(column) if name is None else f"{column} ({name!r})"
        super().__init__(f"covariate column {label} is constant (zero sample sd)")


class BadSubset(NovasError):
    """Subset is empty, contains duplicates, or indexes outside 1..p."""


class NonPositiveBandwidth(NovasError):
    """Bandwidth must be strictly positive."""


class ZeroPreviousScore(NovasError):
    """Relative gain is undefined: the previous best score is zero (perfect fit)."""


class EmptyStage(NovasError):
    """Candidate filtering removed every subset at stage 2."""


class TooManySubsets(NovasError):
    """Exhaustive enumeration would exceed the subset-count guard."""


class TableFormatError(NovasError):
    """Delimited input table is malformed (non-numeric cell, ragged row, ...)."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ConfigError(NovasError):
    """Invalid run configuration."""
