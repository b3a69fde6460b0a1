"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class OrderingError(ValueError):
    """A vector violates a required strict ordering or interlacing."""


class SingularDenominatorError(ArithmeticError):
    """A determinant denominator underflowed; input is too close to collided."""


class ConvergenceError(RuntimeError):
    """An iterative routine failed to converge within its budget."""


class CollisionTrapError(RuntimeError):
    """Reflected dynamics trapped a coordinate between colliding barriers."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class DtUnderflowError(RuntimeError):
    """Adaptive step halving went below dt / 2**10."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
