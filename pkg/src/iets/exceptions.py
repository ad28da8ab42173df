"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its iteration budget.

    Attributes
    ----------
    residual : float
        Largest relative off-diagonal term left when the budget ran out.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class RankDeficiencyError(ValueError):
    """A matrix is (numerically) rank deficient where full rank is required.

    Attributes
    ----------
    index : int
        Zero-based index of the first offending singular value or layer.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class OrderingError(ValueError):
    """The target diagonal value lies outside the interval spanned by a pair."""
