"""Exception hierarchy shared by all modules."""


class DepthStatError(ValueError):
    """Base class for every error raised by this package."""


class InvalidGridError(DepthStatError):
    pass


class IncompatibleGridError(DepthStatError):
    pass


class EmptySampleError(DepthStatError):
    pass


class InsufficientSampleError(DepthStatError):
    pass


class RankDeficiencyError(DepthStatError):
    """Raised when an input function lies (numerically) in the span of its predecessors."""

    def __init__(self, index, residual):
        self.index = index
        self.residual = residual
        super().__init__(
            f"function at index {index} is linearly dependent on the previous ones "
            f"(relative residual norm {residual:.3e})"
        )


class NegativeEigenvalueError(DepthStatError):
    pass


class InvalidBasisError(DepthStatError):
    pass


class DegenerateDataError(DepthStatError):
    pass


class DegenerateScalingError(DepthStatError):
    pass


class RankError(DepthStatError):
    pass


class SelectionError(DepthStatError):
    pass


class DivergentSeriesError(DepthStatError):
    pass


class ParseError(DepthStatError):
    """CSV parse failure carrying a 1-based row and column location."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        loc = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{loc}")


class UsageError(DepthStatError):
    pass
