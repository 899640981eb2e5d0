"""Exception types shared across the package."""


class BmoBellError(Exception):
    """Base for every error this package raises on purpose."""


class DomainError(BmoBellError, ValueError):
    """Input lies outside the mathematical domain of the operation."""


class SingularityError(DomainError):
    """Evaluation requested at a point where the quantity is singular."""


class ConvergenceError(BmoBellError, RuntimeError):
    """An iterative solver failed to reach its residual target."""


class BoundaryError(BmoBellError, ValueError):
    """Operation needs an interior point but got one too close to a boundary."""
