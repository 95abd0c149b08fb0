"""Exception types raised by the library."""


class DistortionError(ValueError):
    """A distortion, measure or loss specification violates an invariant."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class UnboundedError(ArithmeticError):
    """The requested quantity is infinite (e.g. ess sup of an unbounded loss)."""


class NoDensityError(TypeError):
    """The loss model has no Lebesgue density."""


class DivergenceError(ArithmeticError):
    """Adaptive quadrature failed to converge."""


class UnsupportedError(TypeError):
    """The operation is not defined for this kind of input."""
