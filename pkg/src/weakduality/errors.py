"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class GridResolutionError(DomainError):
    """A width is not resolvable on the grid, or the grid box is too small."""


class SingularTransitionError(ArithmeticError):
    """The transition amplitude in a weak-value denominator is exactly zero."""


class NormalizationUndefinedError(ArithmeticError):
    """A normalized trajectory was requested for a vanishing scale factor."""
